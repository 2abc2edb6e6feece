"""Exception hierarchy shared by all engine modules."""

from __future__ import annotations


class EsrsError(Exception):
    """Base class for all engine errors."""


class UnknownItem(EsrsError):
    def __init__(self, item: str):
        super().__init__(f"unknown item: {item!r}")
        self.item = item


class CycleDetected(EsrsError):
    def __init__(self, cycle: list[str]):
        super().__init__(f"prerequisite cycle: {' -> '.join(cycle)}")
        self.cycle = list(cycle)


class InvalidState(EsrsError):
    def __init__(self, members, missing=None):
        detail = f"; missing prerequisites: {sorted(missing)}" if missing else ""
        super().__init__(f"not a downward-closed state: {sorted(members)}{detail}")
        self.members = frozenset(members)
        self.missing = frozenset(missing or ())


class NotInFringe(EsrsError):
    def __init__(self, item: str):
        super().__init__(f"{item!r} is not in the current fringe")
        self.item = item


class ComponentTooLarge(EsrsError):
    pass


class BudgetExceeded(EsrsError):
    pass


class ZeroEvidence(EsrsError):
    """Every state in the beam has zero likelihood for the observed responses."""


class EmptyDistribution(EsrsError):
    pass


class OutOfRangeObservation(EsrsError):
    def __init__(self, value):
        super().__init__(f"observation {value!r} outside [0, 1]")
        self.value = value


class WeightsNotNormalized(EsrsError):
    def __init__(self, weights, total):
        super().__init__(f"weights {weights} sum to {total}, expected 1")
        self.weights = weights
        self.total = total


class NoNeighbors(EsrsError):
    pass


class ZeroPreferenceVector(EsrsError):
    """A cold user (empty confirmed state) has an all-zero preference vector."""


class UnknownArchetype(EsrsError):
    def __init__(self, label: str):
        super().__init__(f"unknown archetype: {label!r}")
        self.label = label


class MissingPairEntry(EsrsError):
    def __init__(self, a: str, b: str):
        super().__init__(f"no precomputed pairwise entry for ({a!r}, {b!r})")
        self.pair = (a, b)


class ParseError(EsrsError):
    pass


class DanglingReference(EsrsError):
    def __init__(self, ref: str, context: str):
        super().__init__(f"reference to unknown POI {ref!r} in {context}")
        self.ref = ref
        self.context = context


class SessionNotFound(EsrsError):
    def __init__(self, session_id: str):
        super().__init__(f"no such session: {session_id!r}")
        self.session_id = session_id
