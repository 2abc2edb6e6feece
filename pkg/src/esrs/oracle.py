"""Brute-force reference implementations used by tests and fixtures.

Everything here trades speed for obviousness: power-set filters, exhaustive
path enumeration, full-support Bayes updates.  Budgets raise instead of
truncating -- a reference must never approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

from .blim import BlimParams, ResponseVector, StateDistribution, likelihood
from .errors import BudgetExceeded, ZeroEvidence
from .lattice import ExplorationState, PoiId, SurmiseRelation, fringe, is_valid_state

ScoreFn = Callable[[PoiId, frozenset[PoiId]], float]


@dataclass(frozen=True)
class OracleBudget:
    max_items_ideals: int = 20
    max_items_path: int = 12

    def __post_init__(self):
        if self.max_items_ideals <= 0 or self.max_items_path <= 0:
            raise ValueError("budgets must be positive")


DEFAULT_BUDGET = OracleBudget()


def enumerate_ideals(rel: SurmiseRelation, budget: OracleBudget = DEFAULT_BUDGET) -> list[ExplorationState]:
    """All valid states, by filtering the full power set; sorted by key."""
    if len(rel.items) > budget.max_items_ideals:
        raise BudgetExceeded(
            f"{len(rel.items)} items exceed the enumeration budget of {budget.max_items_ideals}"
        )
    states = []
    for r in range(len(rel.items) + 1):
        for combo in combinations(rel.items, r):
            if is_valid_state(rel, combo):
                states.append(ExplorationState(frozenset(combo)))
    states.sort(key=lambda s: s.key)
    return states


def brute_force_path(
    rel: SurmiseRelation,
    start: ExplorationState,
    k: int,
    score: ScoreFn,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> tuple[tuple[PoiId, ...], float]:
    """Optimal fringe-guided path of length ≤ k by exhaustive enumeration.

    Paths are shorter than k only when the fringe empties.  Ties on the
    cumulative score resolve to the lexicographically smallest path.
    """
    if len(rel.items) > budget.max_items_path:
        raise BudgetExceeded(
            f"{len(rel.items)} items exceed the path-search budget of {budget.max_items_path}"
        )
    if k < 0:
        raise ValueError("horizon must be non-negative")

    def best(members: frozenset[PoiId], j: int) -> tuple[tuple[PoiId, ...], float]:
        if j == 0:
            return (), 0.0
        frontier = fringe(rel, ExplorationState(members))
        if not frontier:
            return (), 0.0
        best_path: tuple[PoiId, ...] | None = None
        best_value = 0.0
        for q in sorted(frontier):
            sub_path, sub_value = best(members | {q}, j - 1)
            value = score(q, members) + sub_value
            path = (q,) + sub_path
            if best_path is None or value > best_value or (value == best_value and path < best_path):
                best_path, best_value = path, value
        assert best_path is not None
        return best_path, best_value

    return best(start.members, k)


def exact_posterior(
    prior: StateDistribution,
    responses: ResponseVector,
    params: BlimParams,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> StateDistribution:
    """Full-support Bayes update; the reference for beam updates with B = |K|."""
    rel = prior.rel
    all_keys = {s.key for s in enumerate_ideals(rel, budget)}
    if set(prior.support) != all_keys:
        raise ValueError("prior must enumerate every valid state")
    total_prior = sum(prior.support.values())
    if abs(total_prior - 1.0) > 1e-12:
        raise ValueError(f"prior sums to {total_prior}, expected 1 within 1e-12")

    weighted = {
        key: prob * likelihood(responses, prior.state_for(key), params)
        for key, prob in prior.support.items()
    }
    total = sum(weighted.values())
    if total <= 0.0:
        raise ZeroEvidence("all states have zero likelihood under the responses")
    return StateDistribution(rel=rel, support={k: w / total for k, w in weighted.items()})
