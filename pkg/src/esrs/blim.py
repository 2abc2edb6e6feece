"""Probabilistic exploration-state estimation.

A user's latent state is tracked as a distribution over valid states.  Each
engagement signal is noisy: beta[i] is the false-positive rate (a positive
signal without a meaningful visit), eta[i] the false-negative rate (no
signal despite one).  Bayes updates run over the full family when it is
small and over a top-B beam otherwise; EM recovers the noise rates and the
prior from response logs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BudgetExceeded, EmptyDistribution, UnknownItem, ZeroEvidence
from .lattice import (
    ExplorationState,
    PoiId,
    SurmiseRelation,
    count_ideals,
    is_valid_state,
    iter_ideals_bfs,
    members_from_key,
)

RATE_FLOOR = 1e-4
RATE_CEIL = 1.0 - 1e-4


@dataclass
class BlimParams:
    """Per-item false-positive (beta) and false-negative (eta) rates."""

    beta: dict[PoiId, float]
    eta: dict[PoiId, float]

    def validate_strict(self) -> None:
        """Enforce the open-interval invariant required of fitted parameters."""
        for name, rates in (("beta", self.beta), ("eta", self.eta)):
            for item, rate in rates.items():
                if not 0.0 < rate < 1.0:
                    raise ValueError(f"{name}[{item!r}] = {rate} outside (0, 1)")

    @classmethod
    def uniform(cls, items: Iterable[PoiId], beta: float = 0.05, eta: float = 0.10) -> "BlimParams":
        items = list(items)
        return cls(beta={q: beta for q in items}, eta={q: eta for q in items})

    def copy(self) -> "BlimParams":
        return BlimParams(beta=dict(self.beta), eta=dict(self.eta))


@dataclass(frozen=True)
class ResponseVector:
    """Engagement bits r_i in {0,1} over the assessed item set A (= keys)."""

    entries: Mapping[PoiId, int]

    def __post_init__(self):
        for item, bit in self.entries.items():
            if bit not in (0, 1):
                raise ValueError(f"response for {item!r} must be 0 or 1, got {bit!r}")

    @property
    def assessed(self) -> frozenset[PoiId]:
        return frozenset(self.entries)


@dataclass
class StateDistribution:
    """Probability mass over valid exploration states, keyed canonically."""

    rel: SurmiseRelation
    support: dict[str, float]
    beam_tie_truncated: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not self.support:
            raise EmptyDistribution("a state distribution needs at least one state")
        total = sum(self.support.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1 within 1e-9")
        for key in self.support:
            members = members_from_key(key)
            if not is_valid_state(self.rel, members):
                raise ValueError(f"support key {key!r} is not a valid state")

    def state_for(self, key: str) -> ExplorationState:
        return ExplorationState(members_from_key(key))

    def top(self, n: int) -> list[tuple[str, float]]:
        ranked = sorted(self.support.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked[:n]

    def map_state(self) -> ExplorationState:
        key = min(self.support, key=lambda k: (-self.support[k], k))
        return self.state_for(key)

    def copy(self) -> "StateDistribution":
        return StateDistribution(self.rel, dict(self.support), self.beam_tie_truncated)


def likelihood(responses: ResponseVector, state: ExplorationState, params: BlimParams) -> float:
    """Weight of the observed response bits given a latent state.

    Local independence: each assessed item contributes one factor.  A
    positive bit contributes (1 - beta) inside the state and beta outside;
    a zero bit contributes eta inside and (1 - eta) outside.  This is the
    scoring rule the interactive estimator uses.
    """
    result = 1.0
    for item, bit in responses.entries.items():
        if item not in params.beta or item not in params.eta:
            raise UnknownItem(item)
        inside = item in state.members
        if bit == 1:
            result *= (1.0 - params.beta[item]) if inside else params.beta[item]
        else:
            result *= params.eta[item] if inside else (1.0 - params.eta[item])
    return result


def emission_likelihood(responses: ResponseVector, state: ExplorationState, params: BlimParams) -> float:
    """Generative response probability given a latent state.

    Follows the rate semantics directly: an item inside the state emits a
    positive signal with probability 1 - eta (eta being the false-negative
    rate), an item outside emits one with probability beta (the
    false-positive rate).  Each per-item factor pair sums to 1, so this is
    the form EM fits and the form synthetic data is sampled from.
    """
    result = 1.0
    for item, bit in responses.entries.items():
        if item not in params.beta or item not in params.eta:
            raise UnknownItem(item)
        inside = item in state.members
        if bit == 1:
            result *= (1.0 - params.eta[item]) if inside else params.beta[item]
        else:
            result *= params.eta[item] if inside else (1.0 - params.beta[item])
    return result


def beam_update(
    dist: StateDistribution,
    responses: ResponseVector,
    params: BlimParams,
    beam_width: int | None = None,
) -> tuple[StateDistribution, ExplorationState]:
    """Bayes update restricted to the highest-prior states.

    ``beam_width=None`` keeps the whole support.  Ties at the beam boundary
    are cut in canonical-key order and flagged on the result.  Returns the
    posterior and its MAP state (ties again by canonical key).
    """
    if not dist.support:
        raise EmptyDistribution("cannot update an empty distribution")
    if beam_width is not None and beam_width < 1:
        raise ValueError("beam width must be >= 1")

    ranked = sorted(dist.support.items(), key=lambda kv: (-kv[1], kv[0]))
    tie_truncated = False
    if beam_width is not None and beam_width < len(ranked):
        cut_prob = ranked[beam_width - 1][1]
        tie_truncated = ranked[beam_width][1] == cut_prob
        ranked = ranked[:beam_width]

    weighted: dict[str, float] = {}
    for key, prob in ranked:
        weighted[key] = prob * likelihood(responses, dist.state_for(key), params)
    total = sum(weighted.values())
    if total <= 0.0:
        raise ZeroEvidence("all beam states have zero likelihood")
    posterior = StateDistribution(
        rel=dist.rel,
        support={k: w / total for k, w in weighted.items()},
        beam_tie_truncated=tie_truncated,
    )
    return posterior, posterior.map_state()


def initial_distribution(
    rel: SurmiseRelation,
    enumeration_budget: int = 4096,
    beam_width: int = 500,
) -> StateDistribution:
    """Prior for a fresh user: uniform over all states when the family is
    enumerable, otherwise uniform over the first ``beam_width`` states in
    breadth-first lattice order from ∅."""
    try:
        total = count_ideals(rel)
    except Exception:
        total = None
    if total is not None and total <= enumeration_budget:
        states = iter_ideals_bfs(rel)
    else:
        states = iter_ideals_bfs(rel, limit=beam_width)
    mass = 1.0 / len(states)
    return StateDistribution(rel=rel, support={s.key: mass for s in states})


@dataclass
class EmFitResult:
    params: BlimParams
    prior: StateDistribution
    trace: list[float]
    clamp_events: list[str]
    converged: bool


def _response_arrays(
    sequences: Sequence[ResponseVector], items: Sequence[PoiId]
) -> tuple[np.ndarray, np.ndarray]:
    index = {q: i for i, q in enumerate(items)}
    bits = np.zeros((len(sequences), len(items)), dtype=np.float64)
    assessed = np.zeros_like(bits)
    for s, resp in enumerate(sequences):
        for item, bit in resp.entries.items():
            if item not in index:
                raise UnknownItem(item)
            bits[s, index[item]] = bit
            assessed[s, index[item]] = 1.0
    return bits, assessed


def _log_likelihood_matrix(
    bits: np.ndarray, assessed: np.ndarray, membership: np.ndarray,
    beta: np.ndarray, eta: np.ndarray,
) -> np.ndarray:
    """Generative log-likelihood log L[s, K] for every sequence and state."""
    with np.errstate(divide="ignore"):
        log_pos_in = np.log(1.0 - eta)    # r=1, item in state (no false negative)
        log_pos_out = np.log(beta)        # r=1, item outside (false positive)
        log_neg_in = np.log(eta)          # r=0, item in state (false negative)
        log_neg_out = np.log(1.0 - beta)  # r=0, item outside (no false positive)
    member = membership[None, :, :].astype(bool)   # 1 x K x n
    r_pos = bits[:, None, :] == 1.0                # S x 1 x n
    a_mask = assessed[:, None, :] == 1.0
    # Select factors with where() so a 0-weighted -inf branch never produces NaN.
    pos_term = np.where(member, log_pos_in, log_pos_out)
    neg_term = np.where(member, log_neg_in, log_neg_out)
    factors = np.where(r_pos, pos_term, neg_term)
    factors = np.where(a_mask, factors, 0.0)
    return np.sum(factors, axis=2)


def em_fit(
    sequences: Sequence[ResponseVector],
    rel: SurmiseRelation,
    init: BlimParams,
    init_prior: StateDistribution | None = None,
    max_iters: int = 100,
    tol: float = 1e-6,
    enumeration_budget: int = 4096,
    beam_width: int | None = None,
    tie_rates: bool = False,
) -> EmFitResult:
    """Alternate exact (or beam) posteriors with closed-form rate updates.

    Fits the generative emission model (see emission_likelihood): the
    closed-form updates are its exact M-step, so under exact inference the
    log-likelihood trace is non-decreasing.  Rate estimates keep their
    previous value on an empty denominator; an estimate that newly lands on
    0 or 1 is clamped into [RATE_FLOOR, RATE_CEIL] and recorded.

    ``tie_rates=True`` pools the M-step counts across items, fitting one
    shared beta and one shared eta.  Per-item rates on a handful of items
    need far more data than one city dataset provides; tying them is the
    standard remedy when the signal channel is item-independent.
    """
    if not sequences:
        raise ValueError("need at least one response sequence")
    total_states = count_ideals(rel)
    if total_states > enumeration_budget and beam_width is None:
        raise BudgetExceeded(
            f"{total_states} states exceed the enumeration budget of {enumeration_budget}; "
            "configure a beam width"
        )

    items = list(rel.items)
    states = iter_ideals_bfs(rel)
    keys = [s.key for s in states]
    membership = np.array(
        [[1.0 if q in s.members else 0.0 for q in items] for s in states]
    )
    bits, assessed = _response_arrays(sequences, items)

    beta = np.array([init.beta.get(q, 0.05) for q in items])
    eta = np.array([init.eta.get(q, 0.10) for q in items])
    if init_prior is None:
        prior = np.full(len(states), 1.0 / len(states))
    else:
        prior = np.array([init_prior.support.get(k, 0.0) for k in keys])
        prior = prior / prior.sum()

    trace: list[float] = []
    clamp_events: list[str] = []
    converged = False

    for _ in range(max_iters):
        log_lik = _log_likelihood_matrix(bits, assessed, membership, beta, eta)
        if beam_width is not None and beam_width < len(states):
            beam_order = np.lexsort((np.array(keys), -prior))
            keep = np.zeros(len(states), dtype=bool)
            keep[beam_order[:beam_width]] = True
            masked = np.where(keep[None, :], log_lik, -np.inf)
        else:
            masked = log_lik
        with np.errstate(divide="ignore"):
            log_prior = np.log(prior)
        joint = masked + log_prior[None, :]
        row_max = np.max(joint, axis=1)
        if np.any(np.isneginf(row_max)):
            raise ZeroEvidence("a training sequence has zero likelihood everywhere")
        weights = np.exp(joint - row_max[:, None])
        totals = weights.sum(axis=1)
        posterior = weights / totals[:, None]
        loglik = float(np.sum(row_max + np.log(totals)))
        trace.append(loglik)
        if len(trace) >= 2 and trace[-1] - trace[-2] < tol:
            converged = True
            break

        outside = 1.0 - membership  # K x n
        post_out = posterior @ outside          # S x n: posterior mass on states without item
        post_in = posterior @ membership
        beta_num = np.sum(post_out * assessed * bits, axis=0)
        beta_den = np.sum(post_out * assessed, axis=0)
        eta_num = np.sum(post_in * assessed * (1.0 - bits), axis=0)
        eta_den = np.sum(post_in * assessed, axis=0)
        if tie_rates:
            beta_num = np.full_like(beta_num, beta_num.sum())
            beta_den = np.full_like(beta_den, beta_den.sum())
            eta_num = np.full_like(eta_num, eta_num.sum())
            eta_den = np.full_like(eta_den, eta_den.sum())

        new_beta = np.where(beta_den > 0.0, np.divide(beta_num, np.maximum(beta_den, 1e-300)), beta)
        new_eta = np.where(eta_den > 0.0, np.divide(eta_num, np.maximum(eta_den, 1e-300)), eta)
        for name, old, new in (("beta", beta, new_beta), ("eta", eta, new_eta)):
            boundary = ((new <= 0.0) | (new >= 1.0)) & (new != old)
            for idx in np.nonzero(boundary)[0]:
                clamp_events.append(
                    f"{name}[{items[idx]}] estimate {new[idx]:.6f} clamped into "
                    f"[{RATE_FLOOR}, {RATE_CEIL}]"
                )
            new[boundary] = np.clip(new[boundary], RATE_FLOOR, RATE_CEIL)
        beta, eta = new_beta, new_eta
        prior = posterior.sum(axis=0)
        prior = prior / prior.sum()

    fitted = BlimParams(
        beta={q: float(beta[i]) for i, q in enumerate(items)},
        eta={q: float(eta[i]) for i, q in enumerate(items)},
    )
    prior_dist = StateDistribution(
        rel=rel,
        support={k: float(p) for k, p in zip(keys, prior) if p > 0.0} or {keys[0]: 1.0},
    )
    return EmFitResult(
        params=fitted, prior=prior_dist, trace=trace,
        clamp_events=clamp_events, converged=converged,
    )
