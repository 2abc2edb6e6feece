"""Online processing of user interaction events.

Each event updates the preference vector and the state distribution; only
high-confidence engagement with a fringe (or already-confirmed) POI is
allowed to grow the confirmed state, which keeps it downward closed no
matter what the event stream looks like.  Everything else becomes an audit
record rather than an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .blim import BlimParams, ResponseVector, StateDistribution, beam_update
from .errors import ZeroEvidence
from .lattice import FringeCounters, PoiId, SurmiseRelation, fringe_incremental
from .user_model import UserProfile, ema_update


@dataclass(frozen=True)
class SignalThresholds:
    """Dwell-time cutoffs for engagement and high confidence, in minutes."""

    theta_d: float = 10.0
    theta_d_plus: float = 30.0
    dwell_cap_minutes: float = 60.0
    rating_scale: float = 5.0

    def __post_init__(self):
        if not 0 < self.theta_d < self.theta_d_plus:
            raise ValueError("need 0 < theta_d < theta_d_plus")


@dataclass(frozen=True)
class FeedbackEvent:
    user_id: str
    poi: PoiId
    engaged: int
    high_confidence: bool
    observed_intensity: float | None = None
    timestamp: str = ""

    def __post_init__(self):
        if self.engaged not in (0, 1):
            raise ValueError("engaged must be 0 or 1")
        if self.observed_intensity is not None and self.engaged != 1:
            raise ValueError("intensity only accompanies an engaged event")
        if self.observed_intensity is not None and not 0.0 <= self.observed_intensity <= 1.0:
            raise ValueError("intensity must lie in [0, 1]")


@dataclass(frozen=True)
class ClassifiedSignal:
    engaged: int
    high_confidence: bool
    intensity: float | None


def classify_signal(
    thresholds: SignalThresholds,
    dwell_minutes: float | None = None,
    checkin: bool = False,
    rating: float | None = None,
) -> ClassifiedSignal:
    """Turn one raw signal (dwell, check-in, or rating) into an event triple.

    Dwell engages above theta_d and is high-confidence above theta_d_plus;
    check-ins and ratings are deliberate acts and always high-confidence.
    Intensity is the rating normalized to [0, 1], the capped dwell fraction,
    or 1.0 for a bare check-in.
    """
    kinds = sum((dwell_minutes is not None, bool(checkin), rating is not None))
    if kinds != 1:
        raise ValueError("provide exactly one raw signal kind")
    if rating is not None:
        if not 0.0 <= rating <= thresholds.rating_scale:
            raise ValueError(f"rating {rating} outside [0, {thresholds.rating_scale}]")
        return ClassifiedSignal(1, True, rating / thresholds.rating_scale)
    if checkin:
        return ClassifiedSignal(1, True, 1.0)
    assert dwell_minutes is not None
    if dwell_minutes <= thresholds.theta_d:
        return ClassifiedSignal(0, False, None)
    intensity = min(dwell_minutes / thresholds.dwell_cap_minutes, 1.0)
    return ClassifiedSignal(1, dwell_minutes > thresholds.theta_d_plus, intensity)


@dataclass
class UserSession:
    """Everything a single user's event stream is allowed to mutate."""

    rel: SurmiseRelation
    profile: UserProfile
    distribution: StateDistribution
    counters: FringeCounters
    audit: list[dict[str, Any]] = field(default_factory=list)


def process_event(
    session: UserSession,
    event: FeedbackEvent,
    params: BlimParams,
    beam_width: int | None = None,
) -> dict[str, Any]:
    """Apply one event: preference EMA, Bayes update, guarded state growth.

    This is the only code path that mutates the confirmed state.  A
    high-confidence engagement outside the fringe is rejected with a logged
    structural warning; a zero-evidence Bayes update keeps the previous
    distribution.  Returns the audit record (also appended to the session).
    """
    profile = session.profile
    record: dict[str, Any] = {
        "user_id": event.user_id,
        "poi": event.poi,
        "engaged": event.engaged,
        "high_confidence": event.high_confidence,
        "timestamp": event.timestamp,
        "confirmed_changed": False,
        "warnings": [],
    }

    observed = (
        event.observed_intensity
        if event.observed_intensity is not None
        else float(event.engaged)
    )
    ema_update(profile, event.poi, observed)
    record["preference"] = profile.prefs[event.poi]

    try:
        session.distribution, map_state = beam_update(
            session.distribution,
            ResponseVector({event.poi: event.engaged}),
            params,
            beam_width,
        )
        record["map_state"] = map_state.key
    except ZeroEvidence:
        record["warnings"].append("zero evidence; distribution retained")

    if event.engaged == 1 and event.high_confidence:
        confirmed = profile.confirmed
        if event.poi in confirmed.members:
            record["guard"] = "already-confirmed"
        elif event.poi in session.counters.fringe:
            profile.confirmed = confirmed.with_item(event.poi)
            fringe_incremental(session.counters, session.rel, event.poi)
            record["guard"] = "accepted"
            record["confirmed_changed"] = True
        else:
            record["guard"] = "rejected-non-fringe"
            record["warnings"].append(
                f"high-confidence signal on non-fringe POI {event.poi}; confirmed state preserved"
            )
    else:
        record["guard"] = "not-applicable"

    profile.interactions += 1
    record["confirmed"] = profile.confirmed.key
    record["fringe"] = sorted(session.counters.fringe)
    session.audit.append(record)
    return record
