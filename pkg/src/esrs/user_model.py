"""User profiles and the components of the unified interest score.

The interest in a candidate POI blends four normalized signals: the user's
own preference, the POI's inherent properties, a collaborative estimate from
similar users, and a structural accessibility term derived from how much of
the POI's prerequisite ideal the user has already covered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Protocol, Sequence

from .errors import (
    NoNeighbors,
    OutOfRangeObservation,
    UnknownArchetype,
    WeightsNotNormalized,
    ZeroPreferenceVector,
)
from .lattice import EMPTY_STATE, ExplorationState, PoiId, SurmiseRelation

WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class InterestWeights:
    """Mixing weights of the interest score plus the property sub-weights."""

    w_alpha: float = 0.25   # preference
    w_beta: float = 0.25    # location properties
    w_gamma: float = 0.25   # collaborative
    w_delta: float = 0.25   # structural accessibility
    prop_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)

    def validate(self) -> None:
        total = self.w_alpha + self.w_beta + self.w_gamma + self.w_delta
        if any(w < 0 for w in (self.w_alpha, self.w_beta, self.w_gamma, self.w_delta)):
            raise WeightsNotNormalized((self.w_alpha, self.w_beta, self.w_gamma, self.w_delta), total)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise WeightsNotNormalized((self.w_alpha, self.w_beta, self.w_gamma, self.w_delta), total)
        prop_total = sum(self.prop_weights)
        if any(w < 0 for w in self.prop_weights) or abs(prop_total - 1.0) > WEIGHT_TOL:
            raise WeightsNotNormalized(self.prop_weights, prop_total)


@dataclass(frozen=True)
class PoiAttributes:
    """Static attributes of one POI."""

    poi: PoiId
    category: tuple[str, ...] = ()
    popularity: float = 0.5
    review: float = 0.5
    lat: float = 0.0
    lon: float = 0.0
    dwell_minutes: float = 60.0
    open_time: str | None = None
    close_time: str | None = None
    name: str = ""

    def __post_init__(self):
        if not 0.0 <= self.popularity <= 1.0:
            raise ValueError(f"popularity {self.popularity} outside [0, 1]")
        if not 0.0 <= self.review <= 1.0:
            raise ValueError(f"review {self.review} outside [0, 1]")


class PreferencePrior(Protocol):
    """Prior preference for POIs the user has not interacted with.

    A trained latent-factor model can plug in here; the default is a
    configured constant.
    """

    def __call__(self, user_id: str, poi: PoiId) -> float: ...


@dataclass(frozen=True)
class ConstantPrior:
    value: float = 0.5

    def __call__(self, user_id: str, poi: PoiId) -> float:
        return self.value


@dataclass
class UserProfile:
    """Per-user state: confirmed visits, preferences, and scoring knobs."""

    user_id: str
    confirmed: ExplorationState = EMPTY_STATE
    prefs: dict[PoiId, float] = field(default_factory=dict)
    weights: InterestWeights = InterestWeights()
    learning_rate: float = 0.1
    kappa: float = 5.0
    tau: float = 10.0
    interactions: int = 0
    schedule_weights: bool = False
    interests: tuple[str, ...] = ()
    prior: PreferencePrior = ConstantPrior()

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning rate must lie in (0, 1]")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        for poi, value in self.prefs.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"preference for {poi!r} is {value}, outside [0, 1]")

    def preference(self, poi: PoiId) -> float:
        if poi in self.prefs:
            return self.prefs[poi]
        return self.prior(self.user_id, poi)

    def effective_weights(self) -> InterestWeights:
        if self.schedule_weights:
            return weight_schedule(self.weights, self.interactions, self.tau)
        return self.weights


def ema_update(profile: UserProfile, poi: PoiId, observed: float) -> UserProfile:
    """Move the stored preference toward the observation by the learning rate."""
    if not 0.0 <= observed <= 1.0:
        raise OutOfRangeObservation(observed)
    current = profile.preference(poi)
    profile.prefs[poi] = current + profile.learning_rate * (observed - current)
    return profile


def rel_score(rel: SurmiseRelation, poi: PoiId, state: ExplorationState) -> float:
    """Fraction of the POI's prerequisite ideal already inside the state.

    Equals 1 exactly when the POI itself is in the state; for a fringe item
    it is (|ideal|-1)/|ideal|, hence 0 for prerequisite-free items.
    """
    ideal = rel.down(poi)
    return len(ideal & state.members) / len(ideal)


def depth_score(rel: SurmiseRelation, poi: PoiId) -> float:
    """State-independent prerequisite depth, |ideal| / |Q|."""
    return len(rel.down(poi)) / len(rel.items)


def prop_score(
    attrs: PoiAttributes,
    category_relevance: float,
    prop_weights: tuple[float, float, float],
) -> float:
    """Weighted blend of category relevance, popularity, and review score."""
    w_c, w_r, w_s = prop_weights
    total = w_c + w_r + w_s
    if w_c < 0 or w_r < 0 or w_s < 0 or abs(total - 1.0) > WEIGHT_TOL:
        raise WeightsNotNormalized(prop_weights, total)
    if not 0.0 <= category_relevance <= 1.0:
        raise ValueError(f"category relevance {category_relevance} outside [0, 1]")
    return w_c * category_relevance + w_r * attrs.popularity + w_s * attrs.review


def regularized_jaccard(a: frozenset, b: frozenset, epsilon: float = 1.0) -> float:
    return (len(a & b) + epsilon) / (len(a | b) + epsilon)


def _cosine(p: Mapping[PoiId, float], q: Mapping[PoiId, float]) -> float:
    keys = set(p) | set(q)
    dot = sum(p.get(k, 0.0) * q.get(k, 0.0) for k in keys)
    norm_p = math.sqrt(sum(v * v for v in p.values()))
    norm_q = math.sqrt(sum(v * v for v in q.values()))
    if norm_p == 0.0 or norm_q == 0.0:
        return 0.0
    return dot / (norm_p * norm_q)


def collab_score(profile: UserProfile, poi: PoiId, neighbors: Sequence[UserProfile]) -> float:
    """Similarity-weighted mean of neighbor preferences for the POI.

    Similarity blends regularized Jaccard over confirmed states with
    preference-vector cosine; the blend factor grows with the size of the
    user's confirmed state, so a brand-new user relies purely on cosine.
    """
    if not neighbors:
        raise NoNeighbors("collaborative score needs at least one neighbor")
    confirmed = profile.confirmed.members
    if not confirmed and not any(v > 0.0 for v in profile.prefs.values()):
        raise ZeroPreferenceVector(
            "cold user needs a non-zero preference vector for the cosine blend"
        )
    lam = 1.0 - math.exp(-len(confirmed) / profile.kappa)
    num = 0.0
    den = 0.0
    for v in neighbors:
        jac = regularized_jaccard(confirmed, v.confirmed.members)
        cos = _cosine(profile.prefs, v.prefs)
        sim = lam * jac + (1.0 - lam) * cos
        num += sim * v.prefs.get(poi, 0.0)
        den += sim
    if den == 0.0:
        return 0.0
    return num / den


def interest_score(
    profile: UserProfile,
    rel: SurmiseRelation,
    attrs: PoiAttributes,
    state: ExplorationState,
    collab: float,
    category_relevance: float,
) -> float:
    """Unified interest: preference + properties + collaborative + structure."""
    weights = profile.effective_weights()
    weights.validate()
    pref = profile.preference(attrs.poi)
    prop = prop_score(attrs, category_relevance, weights.prop_weights)
    accessibility = rel_score(rel, attrs.poi, state)
    for name, value in (("pref", pref), ("collab", collab)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} component {value} outside [0, 1]")
    return (
        weights.w_alpha * pref
        + weights.w_beta * prop
        + weights.w_gamma * collab
        + weights.w_delta * accessibility
    )


def weight_schedule(base: InterestWeights, t: int, tau: float) -> InterestWeights:
    """Cold-start ramp: personalized weights grow in as interactions accrue.

    The preference, collaborative, and structural weights all rise from 0
    toward their asymptotic values with the same exponential ramp; whatever
    mass is not yet claimed goes to the property weight.
    """
    if t < 0:
        raise ValueError("interaction count must be non-negative")
    if tau <= 0:
        raise ValueError("tau must be positive")
    ramp = 1.0 - math.exp(-t / tau)
    w_alpha = base.w_alpha * ramp
    w_gamma = base.w_gamma * ramp
    w_delta = base.w_delta * ramp
    w_beta = 1.0 - (w_alpha + w_gamma + w_delta)
    return replace(base, w_alpha=w_alpha, w_beta=w_beta, w_gamma=w_gamma, w_delta=w_delta)


def validate_centroids(centroids: Mapping[str, Mapping[PoiId, float]]) -> None:
    for label, vector in centroids.items():
        for poi, value in vector.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(
                    f"centroid {label!r} has out-of-range preference {value} for {poi!r}"
                )


def stereotype_init(
    archetype: str, centroids: Mapping[str, Mapping[PoiId, float]]
) -> dict[PoiId, float]:
    """Copy the archetype centroid as the user's initial preference vector."""
    if archetype not in centroids:
        raise UnknownArchetype(archetype)
    return dict(centroids[archetype])


def category_relevance(
    poi_tags: Iterable[str],
    visited_tags: Iterable[str],
    stated_interests: Iterable[str] = (),
    content_prior: float = 0.5,
) -> float:
    """Jaccard overlap between the POI's tags and the user's visited tags.

    Falls back to stated questionnaire interests, then to the configured
    content prior, when the user has no visited tags yet.
    """
    tags = frozenset(poi_tags)
    visited = frozenset(visited_tags)
    if visited:
        union = tags | visited
        return len(tags & visited) / len(union) if union else 0.0
    stated = frozenset(stated_interests)
    if stated:
        union = tags | stated
        return len(tags & stated) / len(union) if union else 0.0
    return content_prior
