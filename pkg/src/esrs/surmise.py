"""Inference of the prerequisite order from visit trajectories.

Ordered-pair counts feed a confidence estimate and an exact binomial
significance test; surviving pairs go through mutual-pair and
strongly-connected-component cycle resolution before the transitive
closure is taken.  Low-confidence survivors are flagged for human review
and kept out of the active relation until validated.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import CycleDetected
from .lattice import (
    ExplorationState,
    FringeCounters,
    PoiId,
    SurmiseRelation,
    build_relation,
)
from .planner import category_similarity, haversine_km
from .user_model import PoiAttributes

STATUS_CANDIDATE = "candidate"
STATUS_ACCEPTED = "accepted"
STATUS_FLAGGED = "flagged-for-review"
STATUS_REMOVED = "removed"

#: "a precedes b": the first occurrence of a comes before at least one
#: occurrence of b.  A trajectory with repeats can therefore support both
#: directions.  The stricter alternative compares first occurrences only.
PRECEDENCE_FIRST_BEFORE_ANY = "first-before-any"
PRECEDENCE_FIRST_BEFORE_FIRST = "first-before-first"


@dataclass(frozen=True)
class Trajectory:
    user_id: str
    visits: tuple[tuple[PoiId, str], ...]

    def __post_init__(self):
        if not self.visits:
            raise ValueError("a trajectory needs at least one visit")
        stamps = [ts for _, ts in self.visits]
        if any(a > b for a, b in zip(stamps, stamps[1:])):
            raise ValueError("visit timestamps must be non-decreasing")

    @property
    def pois(self) -> tuple[PoiId, ...]:
        return tuple(poi for poi, _ in self.visits)


@dataclass
class CandidateEdge:
    a: PoiId
    b: PoiId
    n_a: int
    n_ab: int
    p_value: float | None = None
    status: str = STATUS_CANDIDATE
    reason: str | None = None

    @property
    def confidence(self) -> float:
        return self.n_ab / self.n_a if self.n_a else 0.0

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "n_a": self.n_a,
            "n_ab": self.n_ab,
            "confidence": self.confidence,
            "p_value": self.p_value,
            "status": self.status,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "CandidateEdge":
        return cls(
            a=raw["a"], b=raw["b"], n_a=int(raw["n_a"]), n_ab=int(raw["n_ab"]),
            p_value=raw.get("p_value"), status=raw.get("status", STATUS_CANDIDATE),
            reason=raw.get("reason"),
        )


@dataclass(frozen=True)
class InferenceConfig:
    min_support: int = 20
    confidence_threshold: float = 0.6
    significance_alpha: float = 0.01
    review_threshold: float = 0.9
    precedence: str = PRECEDENCE_FIRST_BEFORE_ANY

    def __post_init__(self):
        if not 0.0 < self.confidence_threshold < 1.0:
            raise ValueError("confidence threshold must lie in (0, 1)")
        if self.review_threshold < self.confidence_threshold:
            raise ValueError("review threshold must be >= confidence threshold")


def mine_pairs(
    trajectories: Sequence[Trajectory],
    min_support: int,
    precedence: str = PRECEDENCE_FIRST_BEFORE_ANY,
) -> list[CandidateEdge]:
    """Ordered-pair counts over the corpus, kept when support >= min_support."""
    n_item: dict[PoiId, int] = defaultdict(int)
    n_pair: dict[tuple[PoiId, PoiId], int] = defaultdict(int)
    for traj in trajectories:
        pois = traj.pois
        first: dict[PoiId, int] = {}
        last: dict[PoiId, int] = {}
        for idx, poi in enumerate(pois):
            first.setdefault(poi, idx)
            last[poi] = idx
        for a in first:
            n_item[a] += 1
        items = sorted(first)
        for a in items:
            for b in items:
                if a == b:
                    continue
                if precedence == PRECEDENCE_FIRST_BEFORE_FIRST:
                    before = first[a] < first[b]
                else:
                    before = first[a] < last[b]
                if before:
                    n_pair[(a, b)] += 1
    return [
        CandidateEdge(a=a, b=b, n_a=n_item[a], n_ab=count)
        for (a, b), count in sorted(n_pair.items())
        if count >= min_support
    ]


def binom_test(n_ab: int, n_a: int, tau_c: float) -> float:
    """One-sided exact binomial tail P[X >= n_ab | n_a, tau_c]."""
    if not 0 <= n_ab <= n_a or n_a < 1:
        raise ValueError("require 0 <= n_ab <= n_a and n_a >= 1")
    if n_ab == 0:
        return 1.0
    if tau_c <= 0.0:
        return 0.0
    if tau_c >= 1.0:
        return 1.0
    log_tau = math.log(tau_c)
    log_comp = math.log1p(-tau_c)
    total = 0.0
    for k in range(n_ab, n_a + 1):
        log_term = (
            math.lgamma(n_a + 1) - math.lgamma(k + 1) - math.lgamma(n_a - k + 1)
            + k * log_tau + (n_a - k) * log_comp
        )
        total += math.exp(log_term)
    return min(total, 1.0)


def _tarjan_scc(nodes: Iterable[PoiId], edges: Iterable[tuple[PoiId, PoiId]]) -> list[set[PoiId]]:
    adjacency: dict[PoiId, list[PoiId]] = defaultdict(list)
    node_set = set(nodes)
    for a, b in edges:
        adjacency[a].append(b)
        node_set.update((a, b))
    index: dict[PoiId, int] = {}
    lowlink: dict[PoiId, int] = {}
    on_stack: set[PoiId] = set()
    stack: list[PoiId] = []
    counter = [0]
    components: list[set[PoiId]] = []

    def strongconnect(root: PoiId) -> None:
        work = [(root, iter(adjacency[root]))]
        index[root] = lowlink[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = lowlink[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(adjacency[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    lowlink[node] = min(lowlink[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                component: set[PoiId] = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.add(member)
                    if member == node:
                        break
                components.append(component)

    for node in sorted(node_set):
        if node not in index:
            strongconnect(node)
    return components


def resolve_cycles(candidates: Sequence[CandidateEdge]) -> list[CandidateEdge]:
    """Make the candidate graph acyclic, recording each removal.

    Mutual pairs keep the higher-confidence direction (both go on an exact
    tie); any remaining multi-node strongly connected component keeps only
    its single highest-confidence edge.
    """
    active = {(c.a, c.b): c for c in candidates if c.status == STATUS_CANDIDATE}
    for (a, b) in sorted(active):
        if (a, b) not in active or (b, a) not in active:
            continue
        fwd, rev = active[(a, b)], active[(b, a)]
        if fwd.confidence > rev.confidence:
            rev.status, rev.reason = STATUS_REMOVED, f"mutual pair lost to ({a}, {b})"
            del active[(b, a)]
        elif rev.confidence > fwd.confidence:
            fwd.status, fwd.reason = STATUS_REMOVED, f"mutual pair lost to ({b}, {a})"
            del active[(a, b)]
        else:
            fwd.status = rev.status = STATUS_REMOVED
            fwd.reason = rev.reason = "mutual pair with tied confidence; both removed"
            del active[(a, b)]
            del active[(b, a)]

    for component in _tarjan_scc((), list(active)):
        if len(component) < 2:
            continue
        inside = [
            edge for (a, b), edge in active.items()
            if a in component and b in component
        ]
        keep = min(inside, key=lambda e: (-e.confidence, (e.a, e.b)))
        for edge in inside:
            if edge is keep:
                continue
            edge.status = STATUS_REMOVED
            edge.reason = (
                f"cycle component {sorted(component)}: kept ({keep.a}, {keep.b})"
            )
            del active[(edge.a, edge.b)]
    return list(candidates)


def infer_surmise(
    trajectories: Sequence[Trajectory],
    config: InferenceConfig = InferenceConfig(),
    items: Iterable[PoiId] | None = None,
) -> tuple[SurmiseRelation, list[CandidateEdge]]:
    """Mine, test, de-cycle, close; returns the relation and review flags.

    A pair enters the relation only when its confidence clears the threshold
    AND its tail p-value clears the significance level; survivors below the
    review threshold are flagged and withheld until a human validates them.
    """
    item_pool: set[PoiId] = set(items or ())
    for traj in trajectories:
        item_pool.update(traj.pois)
    if not item_pool:
        raise ValueError("no items: provide trajectories or an item list")

    candidates = mine_pairs(trajectories, config.min_support, config.precedence)
    for edge in candidates:
        edge.p_value = binom_test(edge.n_ab, edge.n_a, config.confidence_threshold)
        if edge.confidence < config.confidence_threshold:
            edge.status, edge.reason = STATUS_REMOVED, "confidence below threshold"
        elif edge.p_value > config.significance_alpha:
            edge.status, edge.reason = STATUS_REMOVED, "not statistically significant"

    resolve_cycles(candidates)

    flags: list[CandidateEdge] = []
    accepted: list[tuple[PoiId, PoiId]] = []
    for edge in candidates:
        if edge.status != STATUS_CANDIDATE:
            continue
        if edge.confidence < config.review_threshold:
            edge.status = STATUS_FLAGGED
            edge.reason = "confidence below review threshold; awaiting validation"
            flags.append(edge)
        else:
            edge.status = STATUS_ACCEPTED
            accepted.append((edge.a, edge.b))

    relation = build_relation(sorted(item_pool), accepted)
    return relation, flags


@dataclass
class IncrementalUpdateResult:
    relation: SurmiseRelation
    counters: dict[str, FringeCounters]
    added: list[tuple[PoiId, PoiId]] = field(default_factory=list)
    skipped: list[tuple[tuple[PoiId, PoiId], str]] = field(default_factory=list)


def _relation_from_closure(
    items: Sequence[PoiId], strict_pairs: set[tuple[PoiId, PoiId]]
) -> SurmiseRelation:
    # build_relation re-derives closure and reduction; feeding it the strict
    # closure is idempotent and keeps a single constructor path.
    return build_relation(items, sorted(strict_pairs))


def add_surmise_edge(
    rel: SurmiseRelation, a: PoiId, b: PoiId
) -> tuple[SurmiseRelation, list[PoiId]]:
    """Add the prerequisite a -> b, updating the closure transitively.

    Every predecessor of a becomes related to every successor of b; the
    Hasse diagram is re-derived.  Returns the new relation and the items
    whose lower-cover sets changed (the ones whose fringe counters need a
    patch).  Raises CycleDetected when the reverse is already implied.
    """
    items = list(rel.items)
    for endpoint in (a, b):
        if endpoint not in rel:
            items.append(endpoint)
    strict = {(p, q) for p, q in rel.closure_pairs() if p != q}
    if a == b or (b, a) in strict:
        raise CycleDetected([a, b, a])
    if (a, b) in strict:
        return rel, []
    preds_a = {p for p, q in strict if q == a} | {a}
    succs_b = {q for p, q in strict if p == b} | {b}
    strict |= {(p, s) for p in preds_a for s in succs_b if p != s}
    updated = _relation_from_closure(items, strict)
    changed = [
        q for q in updated.items
        if set(updated.lower_covers(q))
        != (set(rel.lower_covers(q)) if q in rel else set())
    ]
    return updated, changed


def incremental_update(
    rel: SurmiseRelation,
    new_trajectories: Sequence[Trajectory],
    config: InferenceConfig,
    sessions: Mapping[str, tuple[ExplorationState, FringeCounters]] | None = None,
) -> IncrementalUpdateResult:
    """Fold freshly mined pairs into an existing relation.

    Pairs already implied by the order are skipped; pairs whose reverse is
    already in the order are conflicts and skipped with a record.  Each
    accepted pair updates the closure transitively and re-derives the Hasse
    diagram; session fringe counters are patched for exactly the items whose
    lower covers changed.  Unknown POIs join as isolated items first.
    """
    sessions = dict(sessions or {})
    candidates = mine_pairs(new_trajectories, config.min_support, config.precedence)
    surviving: list[CandidateEdge] = []
    for edge in candidates:
        edge.p_value = binom_test(edge.n_ab, edge.n_a, config.confidence_threshold)
        if edge.confidence >= config.review_threshold and edge.p_value <= config.significance_alpha:
            surviving.append(edge)
    surviving.sort(key=lambda e: (-e.confidence, e.a, e.b))

    current = rel
    added: list[tuple[PoiId, PoiId]] = []
    skipped: list[tuple[tuple[PoiId, PoiId], str]] = []

    for edge in surviving:
        pair = (edge.a, edge.b)
        if pair[0] in current and pair[1] in current and current.leq(*pair):
            skipped.append((pair, "already implied"))
            continue
        try:
            current, changed = add_surmise_edge(current, *pair)
        except CycleDetected:
            skipped.append((pair, "conflicts with existing order"))
            continue
        added.append(pair)

        for sid, (state, counters) in sessions.items():
            for q in changed:
                if q in state.members:
                    continue
                outstanding = sum(
                    1 for p in current.lower_covers(q) if p not in state.members
                )
                counters.cnt[q] = outstanding
                if outstanding == 0:
                    counters.fringe.add(q)
                else:
                    counters.fringe.discard(q)

    counters_out = {sid: counters for sid, (_, counters) in sessions.items()}
    return IncrementalUpdateResult(
        relation=current, counters=counters_out, added=added, skipped=skipped
    )


def soft_neighborhood(
    target: PoiId,
    attrs: Mapping[PoiId, PoiAttributes],
    jaccard_threshold: float = 0.5,
    distance_threshold_m: float = 500.0,
) -> frozenset[PoiId]:
    """POIs similar in category or physically close to a (typically new) POI.

    Used for the initial placement of new POIs, which enter the relation
    with no prerequisite links.
    """
    me = attrs[target]
    near = set()
    for other, a in attrs.items():
        if other == target:
            continue
        sim = category_similarity(me.category, a.category)
        dist_m = haversine_km(me.lat, me.lon, a.lat, a.lon) * 1000.0
        if sim > jaccard_threshold or dist_m < distance_threshold_m:
            near.add(other)
    return frozenset(near)
