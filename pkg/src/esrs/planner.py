"""Path planning, diversified ranking, serendipity, and explanations.

Planning is a memoized dynamic program over the lattice of valid states:
the value of (state, horizon) is the best cumulative interest achievable by
fringe-guided additions.  Because the value depends only on the state set,
all visit orders reaching the same set collapse into one evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .errors import MissingPairEntry, NotInFringe, WeightsNotNormalized
from .lattice import (
    ExplorationState,
    PoiId,
    SurmiseRelation,
    fringe,
    require_valid_state,
    state_key,
)
from .user_model import PoiAttributes

ScoreFn = Callable[[PoiId, frozenset[PoiId]], float]
TravelFn = Callable[[frozenset[PoiId], PoiId], float]

UNBOUNDED = None


@dataclass(frozen=True)
class TimeBudget:
    """Total minutes available, plus an optional travel-time model."""

    t_max_minutes: float
    travel: TravelFn | None = None


@dataclass(frozen=True)
class PlanRequest:
    start: ExplorationState
    k_max: int
    beam: int | None = UNBOUNDED
    time_budget: TimeBudget | None = None

    def __post_init__(self):
        if self.k_max < 0:
            raise ValueError("horizon must be non-negative")
        if self.beam is not None and self.beam < 1:
            raise ValueError("beam must be >= 1 (or None for unbounded)")


@dataclass(frozen=True)
class MemoEntry:
    state_key: str
    horizon: int
    value: float
    pred: PoiId | None


@dataclass
class MemoTable:
    """DP memo with a single-write guard and per-horizon evaluation counts."""

    values: dict[tuple, float] = field(default_factory=dict)
    pred: dict[tuple, PoiId] = field(default_factory=dict)
    trace: list[MemoEntry] = field(default_factory=list)
    eval_counts: dict[int, int] = field(default_factory=dict)

    def record(self, key: tuple, horizon: int, value: float, pred: PoiId | None) -> None:
        if key in self.values:
            raise AssertionError(f"memo key {key} written twice")
        self.values[key] = value
        if pred is not None:
            self.pred[key] = pred
        self.trace.append(MemoEntry(key[0], horizon, value, pred))
        self.eval_counts[horizon] = self.eval_counts.get(horizon, 0) + 1


@dataclass
class PlanResult:
    path: tuple[PoiId, ...]
    value: float
    trace: tuple[MemoEntry, ...]
    approximate: bool
    budget_infeasible: bool = False
    eval_counts: Mapping[int, int] = field(default_factory=dict)
    memo: MemoTable | None = None


def _top_b_fringe(
    frontier: Iterable[PoiId],
    members: frozenset[PoiId],
    beam: int | None,
    score: ScoreFn,
) -> list[PoiId]:
    candidates = sorted(frontier)
    if beam is None or len(candidates) <= beam:
        return candidates
    ranked = sorted(candidates, key=lambda q: (-score(q, members), q))
    return sorted(ranked[:beam])


def plan_path(req: PlanRequest, score: ScoreFn, rel: SurmiseRelation) -> PlanResult:
    """Optimal exploration path from the working state.

    Value recursion: 0 at horizon 0 or on an empty fringe, otherwise the best
    single step plus the value of the grown state with one less step.  Ties
    break toward the smallest item id.  Beam-limited runs are flagged as
    approximate.
    """
    require_valid_state(rel, req.start)
    memo = MemoTable()

    def dp(members: frozenset[PoiId], j: int) -> float:
        key = (state_key(members), j)
        if key in memo.values:
            return memo.values[key]
        if j == 0:
            memo.record(key, j, 0.0, None)
            return 0.0
        frontier = fringe(rel, ExplorationState(members))
        if not frontier:
            memo.record(key, j, 0.0, None)
            return 0.0
        best_q: PoiId | None = None
        best_value = -math.inf
        for q in _top_b_fringe(frontier, members, req.beam, score):
            value = score(q, members) + dp(members | {q}, j - 1)
            if value > best_value:
                best_q, best_value = q, value
        assert best_q is not None
        memo.record(key, j, best_value, best_q)
        return best_value

    value = dp(req.start.members, req.k_max)

    path: list[PoiId] = []
    members = req.start.members
    j = req.k_max
    while j > 0:
        key = (state_key(members), j)
        q = memo.pred.get(key)
        if q is None:
            break
        path.append(q)
        members = members | {q}
        j -= 1
    return PlanResult(
        path=tuple(path),
        value=value,
        trace=tuple(memo.trace),
        approximate=req.beam is not None,
        eval_counts=dict(memo.eval_counts),
        memo=memo,
    )


def plan_path_timed(
    req: PlanRequest,
    score: ScoreFn,
    rel: SurmiseRelation,
    durations: Mapping[PoiId, float],
) -> PlanResult:
    """Budgeted variant: a step is feasible only if the visit duration plus
    travel still fits in the remaining time.

    Elapsed time is discretized to whole minutes in the memo key, which keeps
    the table finite at a 1-minute resolution.  If not even the first step
    fits, the result carries the budget_infeasible flag.
    """
    if req.time_budget is None:
        return plan_path(req, score, rel)
    require_valid_state(rel, req.start)
    for q in rel.items:
        if q not in durations:
            raise ValueError(f"no duration for item {q!r}")
    t_max = req.time_budget.t_max_minutes
    travel = req.time_budget.travel or (lambda members, q: 0.0)
    memo = MemoTable()

    def feasible_steps(members: frozenset[PoiId], elapsed: int) -> list[tuple[PoiId, int]]:
        steps = []
        for q in sorted(fringe(rel, ExplorationState(members))):
            arrival = elapsed + durations[q] + travel(members, q)
            if arrival <= t_max + 1e-9:
                steps.append((q, int(round(arrival))))
        return steps

    def dp(members: frozenset[PoiId], j: int, elapsed: int) -> float:
        key = (state_key(members), j, elapsed)
        if key in memo.values:
            return memo.values[key]
        if j == 0:
            memo.record(key, j, 0.0, None)
            return 0.0
        steps = feasible_steps(members, elapsed)
        if not steps:
            memo.record(key, j, 0.0, None)
            return 0.0
        candidates = steps
        if req.beam is not None and len(steps) > req.beam:
            ranked = sorted(steps, key=lambda sq: (-score(sq[0], members), sq[0]))
            candidates = sorted(ranked[: req.beam])
        best_q: PoiId | None = None
        best_arrival = 0
        best_value = -math.inf
        for q, arrival in candidates:
            value = score(q, members) + dp(members | {q}, j - 1, arrival)
            if value > best_value:
                best_q, best_arrival, best_value = q, arrival, value
        assert best_q is not None
        memo.record(key, j, best_value, best_q)
        return best_value

    value = dp(req.start.members, req.k_max, 0)

    path: list[PoiId] = []
    members = req.start.members
    j, elapsed = req.k_max, 0
    while j > 0:
        key = (state_key(members), j, elapsed)
        q = memo.pred.get(key)
        if q is None:
            break
        path.append(q)
        elapsed = int(round(elapsed + durations[q] + travel(members, q)))
        members = members | {q}
        j -= 1

    infeasible = (
        not path
        and req.k_max > 0
        and bool(fringe(rel, req.start))
        and not feasible_steps(req.start.members, 0)
    )
    return PlanResult(
        path=tuple(path),
        value=value,
        trace=tuple(memo.trace),
        approximate=req.beam is not None,
        budget_infeasible=infeasible,
        eval_counts=dict(memo.eval_counts),
        memo=memo,
    )


def diversity(
    candidate: PoiId,
    selected: Sequence[PoiId],
    pairwise_simcat: Mapping[tuple[PoiId, PoiId], float],
    pairwise_dist: Mapping[tuple[PoiId, PoiId], float],
    lam: float = 1.0,
) -> float:
    """One minus the mean redundancy against the already-selected items.

    Redundancy of a pair is category similarity damped by geographic
    distance; an empty selection has diversity 1.
    """
    if not selected:
        return 1.0

    def lookup(table: Mapping[tuple[PoiId, PoiId], float], a: PoiId, b: PoiId) -> float:
        if (a, b) in table:
            return table[(a, b)]
        if (b, a) in table:
            return table[(b, a)]
        raise MissingPairEntry(a, b)

    redundancy = sum(
        lookup(pairwise_simcat, candidate, other)
        * math.exp(-lam * lookup(pairwise_dist, candidate, other))
        for other in selected
    )
    return 1.0 - redundancy / len(selected)


def category_similarity(tags_a: Iterable[str], tags_b: Iterable[str]) -> float:
    a, b = frozenset(tags_a), frozenset(tags_b)
    union = a | b
    return len(a & b) / len(union) if union else 0.0


def haversine_km(lat_a: float, lon_a: float, lat_b: float, lon_b: float) -> float:
    radius = 6371.0
    phi_a, phi_b = math.radians(lat_a), math.radians(lat_b)
    d_phi = phi_b - phi_a
    d_lambda = math.radians(lon_b - lon_a)
    h = math.sin(d_phi / 2) ** 2 + math.cos(phi_a) * math.cos(phi_b) * math.sin(d_lambda / 2) ** 2
    return 2 * radius * math.asin(math.sqrt(h))


def precompute_pairwise(
    pois: Sequence[PoiId], attrs: Mapping[PoiId, PoiAttributes]
) -> tuple[dict[tuple[PoiId, PoiId], float], dict[tuple[PoiId, PoiId], float]]:
    """Category-similarity and distance tables over one fringe."""
    simcat: dict[tuple[PoiId, PoiId], float] = {}
    dist: dict[tuple[PoiId, PoiId], float] = {}
    for i, a in enumerate(pois):
        for b in pois[i + 1:]:
            simcat[(a, b)] = category_similarity(attrs[a].category, attrs[b].category)
            dist[(a, b)] = haversine_km(attrs[a].lat, attrs[a].lon, attrs[b].lat, attrs[b].lon)
    return simcat, dist


def is_serendipitous(
    rel: SurmiseRelation,
    poi: PoiId,
    state: ExplorationState,
    poi_categories: Iterable[str],
    visited_categories: Iterable[str],
) -> bool:
    """A fringe item in an unseen category with at least one prerequisite."""
    if poi not in fringe(rel, state):
        raise NotInFringe(poi)
    tags = frozenset(poi_categories)
    visited = frozenset(visited_categories)
    return not (tags & visited) and len(rel.down(poi)) >= 2


@dataclass(frozen=True)
class RankedItem:
    poi: PoiId
    interest: float
    diversity: float
    novelty: float
    total: float
    serendipitous: bool


def diversified_rank(
    rel: SurmiseRelation,
    frontier: Iterable[PoiId],
    state: ExplorationState,
    k_max: int,
    weights: tuple[float, float, float],
    interest_fn: ScoreFn,
    attrs: Mapping[PoiId, PoiAttributes],
    lam: float = 1.0,
) -> list[RankedItem]:
    """Greedy top-k selection trading interest against novelty and diversity.

    At each step the candidate maximizing
    w_I * interest + w_N * (1 - popularity) + w_D * diversity-against-selected
    wins (ties toward the smaller id).  Items in categories the user has not
    touched, with at least one prerequisite, carry a serendipity mark.
    """
    w_i, w_n, w_d = weights
    total = w_i + w_n + w_d
    if w_i < 0 or w_n < 0 or w_d < 0 or abs(total - 1.0) > 1e-9:
        raise WeightsNotNormalized(weights, total)

    candidates = sorted(frontier)
    simcat, dist = precompute_pairwise(candidates, attrs)
    interest = {q: interest_fn(q, state.members) for q in candidates}
    visited_tags = frozenset(
        tag for member in state.members for tag in attrs[member].category
    )

    selected: list[RankedItem] = []
    remaining = list(candidates)
    while remaining and len(selected) < k_max:
        best: tuple[float, PoiId] | None = None
        best_parts: tuple[float, float] | None = None
        for q in remaining:
            div = diversity(q, [item.poi for item in selected], simcat, dist, lam)
            novelty = 1.0 - attrs[q].popularity
            score = w_i * interest[q] + w_n * novelty + w_d * div
            if best is None or score > best[0]:
                best = (score, q)
                best_parts = (div, novelty)
        assert best is not None and best_parts is not None
        score, q = best
        div, novelty = best_parts
        selected.append(
            RankedItem(
                poi=q,
                interest=interest[q],
                diversity=div,
                novelty=novelty,
                total=score,
                serendipitous=is_serendipitous(rel, q, state, attrs[q].category, visited_tags),
            )
        )
        remaining.remove(q)
    return selected


@dataclass(frozen=True)
class Explanation:
    """Why a fringe item is ready now: a prerequisite chain the user has
    already walked, with a sentence per covering step."""

    target: PoiId
    chain: tuple[PoiId, ...]
    justifications: dict[tuple[PoiId, PoiId], str]
    summary: str | None = None


def _longest_chain(rel: SurmiseRelation, elements: frozenset[PoiId]) -> tuple[PoiId, ...]:
    """Longest chain of the induced sub-order; ties resolve to the smallest
    chain in id-sequence order."""
    best: dict[PoiId, tuple[PoiId, ...]] = {}

    def chain_ending_at(q: PoiId) -> tuple[PoiId, ...]:
        if q in best:
            return best[q]
        preds = [p for p in rel.down(q) if p != q and p in elements]
        candidate: tuple[PoiId, ...] = (q,)
        for p in sorted(preds):
            extended = chain_ending_at(p) + (q,)
            if len(extended) > len(candidate) or (
                len(extended) == len(candidate) and extended < candidate
            ):
                candidate = extended
        best[q] = candidate
        return candidate

    overall: tuple[PoiId, ...] = ()
    for q in sorted(elements):
        chain = chain_ending_at(q)
        if len(chain) > len(overall) or (len(chain) == len(overall) and chain < overall):
            overall = chain
    return overall


def default_edge_text(a: PoiId, b: PoiId) -> str:
    return f"Visiting {a} builds the context that makes {b} worthwhile."


def build_explanation(
    rel: SurmiseRelation,
    poi: PoiId,
    state: ExplorationState,
    edge_texts: Mapping[tuple[PoiId, PoiId], str],
) -> Explanation:
    """Construct the prerequisite-chain explanation for a fringe item.

    Prerequisite-free items get an empty chain with a ready-now summary;
    otherwise the longest chain through the item's strict ideal is annotated
    edge by edge, ending with the step into the item itself.  Missing texts
    fall back to a generated sentence naming both endpoints.
    """
    if poi not in fringe(rel, state):
        raise NotInFringe(poi)
    prerequisites = rel.down(poi) - {poi}
    if not prerequisites:
        return Explanation(
            target=poi,
            chain=(),
            justifications={},
            summary=f"{poi} has no prerequisites and is ready for any visitor.",
        )
    chain = _longest_chain(rel, prerequisites)
    hops = list(zip(chain, chain[1:])) + [(chain[-1], poi)]
    justifications = {
        (a, b): edge_texts.get((a, b), default_edge_text(a, b)) for a, b in hops
    }
    return Explanation(target=poi, chain=chain, justifications=justifications)
