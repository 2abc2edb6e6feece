"""Surmise partial order, order-ideal states, and fringe maintenance.

The partial order ("surmise relation") encodes prerequisite dependencies
between points of interest.  A user's exploration state is only admissible
when it is downward closed (an order ideal), and the fringe of a state is
the set of items whose strict prerequisites are all inside it -- exactly
the structurally valid next visits.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import ComponentTooLarge, CycleDetected, InvalidState, NotInFringe, UnknownItem

PoiId = str

#: Separator used by the canonical state key.  Item ids must not contain it.
KEY_SEPARATOR = ","


def state_key(members: Iterable[PoiId]) -> str:
    """Canonical encoding of a member set: sorted ids joined by commas."""
    return KEY_SEPARATOR.join(sorted(members))


def members_from_key(key: str) -> frozenset[PoiId]:
    return frozenset(key.split(KEY_SEPARATOR)) if key else frozenset()


@dataclass(frozen=True)
class ExplorationState:
    """A set of visited POIs; valid only when downward closed under ⪯."""

    members: frozenset[PoiId]

    @property
    def key(self) -> str:
        return state_key(self.members)

    def __contains__(self, item: PoiId) -> bool:
        return item in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[PoiId]:
        return iter(self.members)

    @classmethod
    def of(cls, *members: PoiId) -> "ExplorationState":
        return cls(frozenset(members))

    @classmethod
    def from_iterable(cls, members: Iterable[PoiId]) -> "ExplorationState":
        return cls(frozenset(members))

    def with_item(self, item: PoiId) -> "ExplorationState":
        return ExplorationState(self.members | {item})


EMPTY_STATE = ExplorationState(frozenset())


@dataclass(frozen=True)
class SurmiseRelation:
    """An immutable partial order over POI ids.

    ``down[q]`` is the principal ideal of ``q`` (everything ⪯ q, including q
    itself); ``hasse`` lists the covering edges of the strict order.  The
    reflexive pairs live in the closure (``leq(q, q)`` is always true) while
    the Hasse diagram excludes them.
    """

    items: tuple[PoiId, ...]
    hasse: tuple[tuple[PoiId, PoiId], ...]
    _down: Mapping[PoiId, frozenset[PoiId]] = field(repr=False)
    _upper_covers: Mapping[PoiId, tuple[PoiId, ...]] = field(repr=False)
    _lower_covers: Mapping[PoiId, tuple[PoiId, ...]] = field(repr=False)

    @property
    def item_set(self) -> frozenset[PoiId]:
        return frozenset(self.items)

    def __contains__(self, item: PoiId) -> bool:
        return item in self._down

    def require(self, item: PoiId) -> None:
        if item not in self._down:
            raise UnknownItem(item)

    def leq(self, p: PoiId, q: PoiId) -> bool:
        """True iff p ⪯ q."""
        self.require(p)
        return p in self.down(q)

    def down(self, q: PoiId) -> frozenset[PoiId]:
        """Principal ideal ↓q = {p : p ⪯ q}."""
        try:
            return self._down[q]
        except KeyError:
            raise UnknownItem(q) from None

    def upper_covers(self, q: PoiId) -> tuple[PoiId, ...]:
        self.require(q)
        return self._upper_covers[q]

    def lower_covers(self, q: PoiId) -> tuple[PoiId, ...]:
        self.require(q)
        return self._lower_covers[q]

    def minimal_elements(self) -> frozenset[PoiId]:
        return frozenset(q for q in self.items if not self._lower_covers[q])

    def closure_pairs(self) -> Iterator[tuple[PoiId, PoiId]]:
        """All pairs (p, q) with p ⪯ q, reflexive pairs included."""
        for q in self.items:
            for p in self._down[q]:
                yield (p, q)


def _find_cycle(items: list[PoiId], adjacency: Mapping[PoiId, list[PoiId]]) -> list[PoiId] | None:
    """Return one directed cycle in the edge graph, or None."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {q: WHITE for q in items}
    parent: dict[PoiId, PoiId] = {}
    for root in items:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(adjacency.get(root, ())))]
        color[root] = GRAY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GRAY:
                    cycle = [node]
                    cur = node
                    while cur != nxt:
                        cur = parent[cur]
                        cycle.append(cur)
                    cycle.reverse()
                    cycle.append(nxt)
                    return cycle
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    parent[nxt] = node
                    stack.append((nxt, iter(adjacency.get(nxt, ()))))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return None


def build_relation(items: Iterable[PoiId], edges: Iterable[tuple[PoiId, PoiId]]) -> SurmiseRelation:
    """Build the reflexive-transitive closure of ``edges`` with its Hasse diagram.

    The edge (p, q) reads "p is a prerequisite of q".  Raises CycleDetected
    when the input implies a directed cycle (antisymmetry violation) and
    UnknownItem for edges mentioning ids outside ``items``.
    """
    item_list = list(items)
    if not item_list:
        raise ValueError("item list must be non-empty")
    seen: set[PoiId] = set()
    for q in item_list:
        if not q:
            raise ValueError("item ids must be non-empty strings")
        if KEY_SEPARATOR in q:
            raise ValueError(f"item id {q!r} contains the reserved separator {KEY_SEPARATOR!r}")
        if q in seen:
            raise ValueError(f"duplicate item id {q!r}")
        seen.add(q)

    adjacency: dict[PoiId, list[PoiId]] = {q: [] for q in item_list}
    edge_list = []
    for p, q in edges:
        if p not in seen:
            raise UnknownItem(p)
        if q not in seen:
            raise UnknownItem(q)
        if p == q:
            raise CycleDetected([p, p])
        edge_list.append((p, q))
        adjacency[p].append(q)

    cycle = _find_cycle(item_list, adjacency)
    if cycle is not None:
        raise CycleDetected(cycle)

    n = len(item_list)
    index = {q: i for i, q in enumerate(item_list)}
    # Reflexive closure as row bitmasks: row i has bit j set iff items[j] ⪯ items[i].
    pred_mask = [1 << i for i in range(n)]
    for p, q in edge_list:
        pred_mask[index[q]] |= 1 << index[p]
    # Floyd–Warshall over the item index space (n is city-scale).
    for k in range(n):
        bit_k = 1 << k
        row_k = pred_mask[k]
        for i in range(n):
            if pred_mask[i] & bit_k:
                pred_mask[i] |= row_k

    down: dict[PoiId, frozenset[PoiId]] = {}
    for i, q in enumerate(item_list):
        down[q] = frozenset(item_list[j] for j in range(n) if pred_mask[i] >> j & 1)

    # Transitive reduction: (p, q) is covering iff p ≺ q strictly and no
    # intermediate r with p ≺ r ≺ q.
    hasse: list[tuple[PoiId, PoiId]] = []
    lower: dict[PoiId, list[PoiId]] = {q: [] for q in item_list}
    upper: dict[PoiId, list[PoiId]] = {q: [] for q in item_list}
    for j, q in enumerate(item_list):
        strict_preds = [i for i in range(n) if i != j and pred_mask[j] >> i & 1]
        for i in strict_preds:
            if not any(
                k != i and k != j and pred_mask[j] >> k & 1 and pred_mask[k] >> i & 1
                for k in strict_preds
            ):
                p = item_list[i]
                hasse.append((p, q))
                lower[q].append(p)
                upper[p].append(q)

    hasse.sort()
    return SurmiseRelation(
        items=tuple(item_list),
        hasse=tuple(hasse),
        _down=down,
        _upper_covers={q: tuple(sorted(upper[q])) for q in item_list},
        _lower_covers={q: tuple(sorted(lower[q])) for q in item_list},
    )


def principal_ideal(rel: SurmiseRelation, q: PoiId) -> frozenset[PoiId]:
    """↓q = {p : p ⪯ q}; always contains q itself."""
    return rel.down(q)


def is_valid_state(rel: SurmiseRelation, members: Iterable[PoiId]) -> bool:
    """True iff ``members`` is downward closed under the relation."""
    member_set = frozenset(members)
    for q in member_set:
        if q not in rel:
            raise UnknownItem(q)
        if not rel.down(q) <= member_set:
            return False
    return True


def require_valid_state(rel: SurmiseRelation, state: ExplorationState) -> None:
    for q in state.members:
        if q not in rel:
            raise UnknownItem(q)
        missing = rel.down(q) - state.members
        if missing:
            raise InvalidState(state.members, missing)


def fringe(rel: SurmiseRelation, state: ExplorationState) -> frozenset[PoiId]:
    """Items outside the state whose strict prerequisites all lie inside it.

    Counter-based pass over the Hasse diagram; O(n + |E_H|).
    """
    require_valid_state(rel, state)
    inside = state.members
    cnt = {q: 0 for q in rel.items if q not in inside}
    for p, q in rel.hasse:
        if q not in inside and p not in inside:
            cnt[q] += 1
    return frozenset(q for q, c in cnt.items() if c == 0)


@dataclass
class FringeCounters:
    """Per-session fringe bookkeeping.

    ``cnt[q]`` counts the lower covers of q that are still outside the
    session's state, for every q outside the state; the fringe is exactly
    the zero-count entries.
    """

    cnt: dict[PoiId, int]
    fringe: set[PoiId]

    def copy(self) -> "FringeCounters":
        return FringeCounters(dict(self.cnt), set(self.fringe))


def init_counters(rel: SurmiseRelation, state: ExplorationState) -> FringeCounters:
    require_valid_state(rel, state)
    inside = state.members
    cnt = {q: 0 for q in rel.items if q not in inside}
    for p, q in rel.hasse:
        if q not in inside and p not in inside:
            cnt[q] += 1
    return FringeCounters(cnt=cnt, fringe={q for q, c in cnt.items() if c == 0})


def fringe_incremental(counters: FringeCounters, rel: SurmiseRelation, added: PoiId) -> FringeCounters:
    """Update counters in place after ``added`` joins the state.

    Cost proportional to the Hasse out-degree of ``added``.
    """
    if added not in counters.fringe:
        raise NotInFringe(added)
    counters.fringe.discard(added)
    counters.cnt.pop(added, None)
    for succ in rel.upper_covers(added):
        if succ in counters.cnt:
            counters.cnt[succ] -= 1
            if counters.cnt[succ] == 0:
                counters.fringe.add(succ)
    return counters


def well_graded_chain(rel: SurmiseRelation, state: ExplorationState) -> list[PoiId]:
    """An ordering p_1..p_m of the state where every prefix is a valid state
    and each p_j lies in the fringe of the preceding prefix.

    Constructed by iterated removal of maximal elements (smallest id first
    among ties, for determinism).
    """
    require_valid_state(rel, state)
    remaining = set(state.members)
    removal: list[PoiId] = []
    while remaining:
        maximal = sorted(
            q for q in remaining
            if not any(q in rel.down(r) and q != r for r in remaining)
        )
        pick = maximal[0]
        remaining.discard(pick)
        removal.append(pick)
    removal.reverse()
    return removal


def _connected_components(rel: SurmiseRelation) -> list[list[PoiId]]:
    neighbors: dict[PoiId, set[PoiId]] = {q: set() for q in rel.items}
    for p, q in rel.hasse:
        neighbors[p].add(q)
        neighbors[q].add(p)
    seen: set[PoiId] = set()
    components = []
    for start in rel.items:
        if start in seen:
            continue
        comp = []
        queue = deque([start])
        seen.add(start)
        while queue:
            node = queue.popleft()
            comp.append(node)
            for other in neighbors[node]:
                if other not in seen:
                    seen.add(other)
                    queue.append(other)
        components.append(sorted(comp))
    return components


def _count_component_ideals(rel: SurmiseRelation, component: frozenset[PoiId]) -> int:
    """Exact ideal count of the sub-order induced on ``component``.

    Recursion on a minimal element x: ideals omitting x are ideals of the
    poset with x's up-set removed; ideals containing x are in bijection
    with ideals of the poset minus x.
    """
    memo: dict[frozenset[PoiId], int] = {}

    def count(elems: frozenset[PoiId]) -> int:
        if not elems:
            return 1
        cached = memo.get(elems)
        if cached is not None:
            return cached
        x = min(q for q in elems if not any(p in elems and p != q for p in rel.down(q)))
        up_x = frozenset(q for q in elems if x in rel.down(q))
        result = count(elems - up_x) + count(elems - {x})
        memo[elems] = result
        return result

    return count(component)


def count_ideals(rel: SurmiseRelation, component_cap: int = 20) -> int:
    """Number of valid exploration states.

    Independent components multiply; a chain of m elements contributes
    m + 1 ideals exactly, anything else is counted exhaustively (components
    larger than ``component_cap`` are rejected).
    """
    total = 1
    for comp in _connected_components(rel):
        comp_set = frozenset(comp)
        is_chain = all(
            rel.leq(a, b) or rel.leq(b, a)
            for i, a in enumerate(comp)
            for b in comp[i + 1:]
        )
        if is_chain:
            total *= len(comp) + 1
            continue
        if len(comp) > component_cap:
            raise ComponentTooLarge(
                f"component with {len(comp)} items exceeds the cap of {component_cap}"
            )
        total *= _count_component_ideals(rel, comp_set)
    return total


def iter_ideals_bfs(rel: SurmiseRelation, limit: int | None = None) -> list[ExplorationState]:
    """Enumerate valid states breadth-first from ∅ by fringe additions.

    States arrive in shortest-lattice-distance order (canonical key order
    within a layer).  With ``limit`` set, enumeration stops after that many
    states; otherwise the full family is produced.
    """
    start = EMPTY_STATE
    seen: dict[frozenset[PoiId], None] = {start.members: None}
    order = [start]
    layer = [start.members]
    while layer:
        next_layer: set[frozenset[PoiId]] = set()
        for members in layer:
            for q in fringe(rel, ExplorationState(members)):
                grown = members | {q}
                if grown not in seen:
                    next_layer.add(grown)
        for grown in sorted(next_layer, key=state_key):
            seen[grown] = None
            order.append(ExplorationState(grown))
            if limit is not None and len(order) >= limit:
                return order
        layer = list(next_layer)
    return order
