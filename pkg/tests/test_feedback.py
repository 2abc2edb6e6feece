from __future__ import annotations

import random

import pytest

from esrs.blim import BlimParams, StateDistribution, initial_distribution
from esrs.feedback import (
    FeedbackEvent,
    SignalThresholds,
    UserSession,
    classify_signal,
    process_event,
)
from esrs.lattice import EMPTY_STATE, fringe, init_counters, is_valid_state
from esrs.user_model import UserProfile

from .conftest import random_relation, state

THRESHOLDS = SignalThresholds(theta_d=10.0, theta_d_plus=30.0)


class TestClassifySignal:
    def test_long_dwell(self):
        signal = classify_signal(THRESHOLDS, dwell_minutes=45.0)
        assert signal.engaged == 1
        assert signal.high_confidence
        assert signal.intensity == pytest.approx(0.75)

    def test_short_dwell(self):
        signal = classify_signal(THRESHOLDS, dwell_minutes=5.0)
        assert signal == classify_signal(THRESHOLDS, dwell_minutes=5.0)
        assert signal.engaged == 0
        assert not signal.high_confidence
        assert signal.intensity is None

    def test_medium_dwell_engaged_low_confidence(self):
        signal = classify_signal(THRESHOLDS, dwell_minutes=15.0)
        assert signal.engaged == 1
        assert not signal.high_confidence

    def test_rating(self):
        signal = classify_signal(THRESHOLDS, rating=4.5)
        assert signal.engaged == 1
        assert signal.high_confidence
        assert signal.intensity == pytest.approx(0.9)

    def test_checkin(self):
        signal = classify_signal(THRESHOLDS, checkin=True)
        assert signal == classify_signal(THRESHOLDS, checkin=True)
        assert signal.engaged == 1 and signal.high_confidence
        assert signal.intensity == 1.0

    def test_exactly_one_kind(self):
        with pytest.raises(ValueError):
            classify_signal(THRESHOLDS, dwell_minutes=5.0, checkin=True)
        with pytest.raises(ValueError):
            classify_signal(THRESHOLDS)

    def test_dwell_cap(self):
        signal = classify_signal(THRESHOLDS, dwell_minutes=400.0)
        assert signal.intensity == 1.0

    def test_threshold_ordering_enforced(self):
        with pytest.raises(ValueError):
            SignalThresholds(theta_d=30.0, theta_d_plus=10.0)


def make_session(rel, confirmed=EMPTY_STATE, prefs=None) -> UserSession:
    profile = UserProfile(user_id="u", confirmed=confirmed, prefs=dict(prefs or {}))
    return UserSession(
        rel=rel,
        profile=profile,
        distribution=initial_distribution(rel),
        counters=init_counters(rel, confirmed),
    )


def event(poi, engaged=1, hc=True, intensity=None, ts="2026-01-01T10:00:00"):
    return FeedbackEvent(
        user_id="u", poi=poi, engaged=engaged, high_confidence=hc,
        observed_intensity=intensity, timestamp=ts,
    )


class TestProcessEvent:
    def params(self, rel):
        return BlimParams.uniform(rel.items, beta=0.05, eta=0.10)

    def test_worked_example(self, five_poi):
        session = make_session(five_poi, confirmed=state("q1"), prefs={"q4": 0.80})
        record = process_event(session, event("q4", intensity=0.9), self.params(five_poi))
        assert session.profile.prefs["q4"] == pytest.approx(0.81, abs=1e-12)
        assert session.profile.confirmed.members == {"q1", "q4"}
        assert session.counters.fringe == {"q2", "q5"}
        assert record["confirmed_changed"]
        assert record["guard"] == "accepted"

    def test_non_fringe_high_confidence_rejected(self, five_poi):
        session = make_session(five_poi, confirmed=state("q1"))
        record = process_event(session, event("q5"), self.params(five_poi))
        assert session.profile.confirmed.members == {"q1"}
        assert record["guard"] == "rejected-non-fringe"
        assert record["warnings"]
        # the distribution was still updated
        assert record.get("map_state") is not None

    def test_low_confidence_updates_distribution_only(self, five_poi):
        session = make_session(five_poi, confirmed=state("q1"))
        before = dict(session.distribution.support)
        record = process_event(session, event("q4", hc=False, intensity=0.5), self.params(five_poi))
        assert session.profile.confirmed.members == {"q1"}
        assert session.distribution.support != before
        assert record["guard"] == "not-applicable"

    def test_disengaged_event_lowers_preference(self, five_poi):
        session = make_session(five_poi, prefs={"q1": 0.5})
        process_event(session, event("q1", engaged=0, hc=False), self.params(five_poi))
        assert session.profile.prefs["q1"] == pytest.approx(0.45)
        assert session.profile.confirmed.members == set()

    def test_reconfirming_is_idempotent(self, five_poi):
        session = make_session(five_poi, confirmed=state("q1"))
        process_event(session, event("q1", intensity=1.0), self.params(five_poi))
        assert session.profile.confirmed.members == {"q1"}
        assert session.counters.fringe == {"q2", "q4"}

    def test_zero_evidence_keeps_distribution(self, five_poi):
        session = make_session(five_poi)
        # prior mass only on the empty state; a sure positive on q1 under
        # zero noise has no support
        session.distribution = StateDistribution(rel=five_poi, support={"": 1.0})
        params = BlimParams(
            beta={q: 0.0 for q in five_poi.items}, eta={q: 0.0 for q in five_poi.items}
        )
        record = process_event(session, event("q1", intensity=1.0), params)
        assert session.distribution.support == {"": 1.0}
        assert any("zero evidence" in w for w in record["warnings"])
        # the structural guard still ran: q1 is in the fringe of the empty state
        assert session.profile.confirmed.members == {"q1"}

    def test_audit_appended(self, five_poi):
        session = make_session(five_poi)
        process_event(session, event("q1", intensity=1.0), self.params(five_poi))
        process_event(session, event("q5"), self.params(five_poi))
        assert len(session.audit) == 2
        assert session.audit[1]["guard"] == "rejected-non-fringe"

    def test_confirmed_valid_under_adversarial_streams(self):
        # random event streams, including non-fringe check-ins the guard must
        # reject: the confirmed state stays a valid ideal and the counters
        # stay in lockstep with a batch recomputation
        rng = random.Random(99)
        for round_ in range(60):
            rel = random_relation(rng, rng.randint(1, 8), rng.choice([0.2, 0.4]))
            session = make_session(rel)
            params = BlimParams.uniform(rel.items, beta=0.1, eta=0.1)
            for _ in range(12):
                poi = rng.choice(rel.items)
                engaged = rng.random() < 0.8
                ev = event(
                    poi,
                    engaged=1 if engaged else 0,
                    hc=engaged and rng.random() < 0.7,
                    intensity=rng.random() if engaged else None,
                )
                process_event(session, ev, params)
                assert is_valid_state(rel, session.profile.confirmed.members)
                assert session.counters.fringe == fringe(rel, session.profile.confirmed)

    def test_only_process_event_mutates_confirmed(self, five_poi):
        # every audit record that reports a confirmed-state change came from
        # an accepted guard decision
        session = make_session(five_poi)
        params = self.params(five_poi)
        rng = random.Random(3)
        for _ in range(20):
            poi = rng.choice(five_poi.items)
            process_event(session, event(poi, intensity=1.0), params)
        for record in session.audit:
            if record["confirmed_changed"]:
                assert record["guard"] == "accepted"
