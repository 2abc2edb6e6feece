"""Session orchestration: cold start, recommendation cycles, feedback.

One service instance owns a dataset snapshot and an in-process session
store.  A recommendation cycle assesses the latent state, merges the MAP
estimate with the confirmed state into a throwaway working state, and then
either plans a path or produces a diversified ranking -- every returned
item restricted to the working-state fringe and carrying an explanation.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .blim import BlimParams, StateDistribution, beam_update, initial_distribution, ResponseVector
from .config import EngineConfig, load_config
from .dataset import Dataset
from .errors import NoNeighbors, SessionNotFound, UnknownItem, ZeroPreferenceVector
from .feedback import FeedbackEvent, SignalThresholds, UserSession, classify_signal, process_event
from .lattice import (
    EMPTY_STATE,
    ExplorationState,
    FringeCounters,
    PoiId,
    fringe,
    init_counters,
)
from .planner import (
    Explanation,
    PlanRequest,
    RankedItem,
    build_explanation,
    diversified_rank,
    plan_path,
)
from .user_model import (
    ConstantPrior,
    InterestWeights,
    UserProfile,
    category_relevance,
    collab_score,
    interest_score,
    stereotype_init,
)

MODE_PATH = "path"
MODE_RANK = "rank"


def cold_start_entries(dataset: Dataset) -> frozenset[PoiId]:
    """Minimal elements of the prerequisite order: valid first visits for
    any new user, guaranteed non-empty."""
    return dataset.relation.minimal_elements()


@dataclass
class Session:
    session_id: str
    inner: UserSession
    mode: str = MODE_PATH
    relation_version: int = 1
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    @property
    def profile(self) -> UserProfile:
        return self.inner.profile

    @property
    def distribution(self) -> StateDistribution:
        return self.inner.distribution

    @property
    def counters(self) -> FringeCounters:
        return self.inner.counters


@dataclass
class RecommendedStep:
    poi: PoiId
    interest: float
    explanation: Explanation
    ranked: RankedItem | None = None


@dataclass
class Recommendation:
    mode: str
    complete: bool
    steps: list[RecommendedStep]
    working_state: ExplorationState
    value: float | None = None
    notice: str | None = None
    approximate: bool = False


class RecommendationService:
    """In-process engine around one dataset snapshot."""

    def __init__(
        self,
        dataset: Dataset,
        config: EngineConfig | None = None,
        audit_log: str | Path | None = None,
    ):
        self.dataset = dataset
        self.config = load_config(config or dataset.config)
        self.sessions: dict[str, Session] = {}
        self.relation_version = 1
        self._store_lock = threading.RLock()
        self.audit_log = Path(audit_log) if audit_log else None
        self.params = BlimParams.uniform(
            dataset.relation.items, self.config.default_beta, self.config.default_eta
        )
        self.thresholds = SignalThresholds(
            theta_d=self.config.theta_d,
            theta_d_plus=self.config.theta_d_plus,
            dwell_cap_minutes=self.config.dwell_cap_minutes,
            rating_scale=self.config.rating_scale,
        )

    # -- session lifecycle -------------------------------------------------

    def create_session(self, cold_start: Mapping[str, Any] | None = None) -> Session:
        """Cold-start a session: questionnaire, decline, or archetype."""
        cold_start = dict(cold_start or {"strategy": "decline"})
        strategy = cold_start.get("strategy", "decline")
        config = self.config
        base_weights = InterestWeights(
            w_alpha=config.w_alpha, w_beta=config.w_beta,
            w_gamma=config.w_gamma, w_delta=config.w_delta,
            prop_weights=config.prop_weights,
        )
        user_id = cold_start.get("user_id") or f"user-{uuid.uuid4().hex[:8]}"
        prefs: dict[PoiId, float] = {}
        interests: tuple[str, ...] = ()
        schedule = False

        if strategy == "questionnaire":
            interests = tuple(cold_start.get("interests", ()))
            for entry in cold_start_entries(self.dataset):
                overlap = category_relevance(
                    self.dataset.pois[entry].category, (), interests, 0.0
                )
                prefs[entry] = min(1.0, config.preference_prior + 0.5 * overlap)
        elif strategy == "decline":
            schedule = True
        elif strategy == "archetype":
            prefs = stereotype_init(cold_start.get("archetype", ""), self.dataset.centroids)
        else:
            raise ValueError(f"unknown cold-start strategy {strategy!r}")

        profile = UserProfile(
            user_id=user_id,
            confirmed=EMPTY_STATE,
            prefs=prefs,
            weights=base_weights,
            learning_rate=config.learning_rate,
            kappa=config.kappa,
            tau=config.tau,
            schedule_weights=schedule,
            interests=interests,
            prior=ConstantPrior(config.preference_prior),
        )
        inner = UserSession(
            rel=self.dataset.relation,
            profile=profile,
            distribution=initial_distribution(
                self.dataset.relation,
                config.enumeration_budget,
                config.beam_width or 500,
            ),
            counters=init_counters(self.dataset.relation, EMPTY_STATE),
        )
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            inner=inner,
            relation_version=self.relation_version,
        )
        with self._store_lock:
            self.sessions[session.session_id] = session
        return session

    def get_session(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise SessionNotFound(session_id) from None

    def neighbors_of(self, session: Session) -> list[UserProfile]:
        with self._store_lock:
            return [
                s.profile for s in self.sessions.values()
                if s.session_id != session.session_id
            ]

    # -- scoring -----------------------------------------------------------

    def interest_function(self, session: Session):
        """State-dependent interest score bound to this session's profile."""
        rel = self.dataset.relation
        attrs = self.dataset.pois
        profile = session.profile
        neighbors = self.neighbors_of(session)
        collab_cache: dict[PoiId, float] = {}

        def collab(poi: PoiId) -> float:
            if poi not in collab_cache:
                if not neighbors:
                    collab_cache[poi] = 0.0
                else:
                    try:
                        collab_cache[poi] = collab_score(profile, poi, neighbors)
                    except (NoNeighbors, ZeroPreferenceVector):
                        collab_cache[poi] = 0.0
            return collab_cache[poi]

        def score(poi: PoiId, members: frozenset[PoiId]) -> float:
            visited_tags = [
                tag for member in members for tag in attrs[member].category
            ]
            relevance = category_relevance(
                attrs[poi].category, visited_tags, profile.interests,
                self.config.content_prior,
            )
            return interest_score(
                profile, rel, attrs[poi], ExplorationState(members),
                collab(poi), relevance,
            )

        return score

    # -- pipeline ----------------------------------------------------------

    def recommend(
        self,
        session_id: str,
        mode: str | None = None,
        k_max: int = 3,
        beam: int | None = None,
        rank_weights: tuple[float, float, float] | None = None,
    ) -> Recommendation:
        session = self.get_session(session_id)
        with session.lock:
            return self._recommend_locked(session, mode, k_max, beam, rank_weights)

    def _recommend_locked(self, session, mode, k_max, beam, rank_weights) -> Recommendation:
        mode = mode or session.mode
        if mode not in (MODE_PATH, MODE_RANK):
            raise ValueError(f"unknown mode {mode!r}")
        rel = self.dataset.relation
        confirmed = session.profile.confirmed

        # Phase 1: state assessment.  Events already folded their responses
        # into the distribution, so this re-ranks with an empty response
        # vector; the MAP merges with the confirmed state (union of ideals
        # is an ideal, so the working state is always valid).
        distribution, map_state = beam_update(
            session.distribution, ResponseVector({}), self.params, beam
        )
        if beam is not None and beam < len(session.distribution.support):
            # only a truncating beam actually changes the distribution; the
            # empty-response update is the identity and is not written back,
            # keeping reads bit-stable
            session.inner.distribution = distribution
        working = ExplorationState(map_state.members | confirmed.members)

        # Phase 2: fringe of the working state.
        frontier = fringe(rel, working)
        if not frontier:
            return Recommendation(
                mode=mode, complete=True, steps=[], working_state=working,
                notice="Exploration complete: every reachable POI has been visited.",
            )

        score = self.interest_function(session)
        edge_texts = self.dataset.edge_texts

        # Phase 3: plan or rank; every item carries its explanation.
        if mode == MODE_PATH:
            result = plan_path(PlanRequest(start=working, k_max=k_max, beam=beam), score, rel)
            steps = []
            members = working.members
            for poi in result.path:
                state_now = ExplorationState(members)
                steps.append(
                    RecommendedStep(
                        poi=poi,
                        interest=score(poi, members),
                        explanation=build_explanation(rel, poi, state_now, edge_texts),
                    )
                )
                members = members | {poi}
            return Recommendation(
                mode=mode, complete=False, steps=steps, working_state=working,
                value=result.value, approximate=result.approximate,
            )

        weights = rank_weights or self.config.rank_weights
        ranked = diversified_rank(
            rel, frontier, working, k_max, weights, score,
            self.dataset.pois, self.config.diversity_lambda,
        )
        steps = [
            RecommendedStep(
                poi=item.poi,
                interest=item.interest,
                explanation=build_explanation(rel, item.poi, working, edge_texts),
                ranked=item,
            )
            for item in ranked
        ]
        return Recommendation(
            mode=mode, complete=False, steps=steps, working_state=working,
            approximate=beam is not None,
        )

    # -- feedback ----------------------------------------------------------

    def submit_event(
        self,
        session_id: str,
        poi: PoiId,
        dwell_minutes: float | None = None,
        checkin: bool = False,
        rating: float | None = None,
        timestamp: str = "",
    ) -> dict[str, Any]:
        """Classify one raw signal and run it through the feedback loop."""
        session = self.get_session(session_id)
        if poi not in self.dataset.pois:
            raise UnknownItem(poi)
        signal = classify_signal(
            self.thresholds, dwell_minutes=dwell_minutes, checkin=checkin, rating=rating
        )
        event = FeedbackEvent(
            user_id=session.profile.user_id,
            poi=poi,
            engaged=signal.engaged,
            high_confidence=signal.high_confidence,
            observed_intensity=signal.intensity,
            timestamp=timestamp,
        )
        with session.lock:
            record = process_event(session.inner, event, self.params, self.config.beam_width)
        if self.audit_log is not None:
            with self._store_lock, self.audit_log.open("a") as handle:
                handle.write(json.dumps(record, sort_keys=True) + "\n")
        return record

    # -- views & persistence -----------------------------------------------

    def state_view(self, session_id: str) -> dict[str, Any]:
        session = self.get_session(session_id)
        with session.lock:
            confirmed = sorted(session.profile.confirmed.members)
            frontier = sorted(session.counters.fringe)
            top = session.distribution.top(10)
        return {
            "session_id": session.session_id,
            "confirmed": confirmed,
            "fringe": frontier,
            "distribution_top": [{"state": key, "p": prob} for key, prob in top],
            "relation_version": self.relation_version,
            "interactions": session.profile.interactions,
        }

    def hasse_view(self) -> dict[str, Any]:
        rel = self.dataset.relation
        return {
            "items": [
                {
                    "id": poi,
                    "name": self.dataset.pois[poi].name,
                    "category": list(self.dataset.pois[poi].category),
                }
                for poi in rel.items
            ],
            "edges": [list(edge) for edge in rel.hasse],
            "edge_texts": [
                {"from": a, "to": b, "text": text}
                for (a, b), text in sorted(self.dataset.edge_texts.items())
            ],
            "relation_version": self.relation_version,
        }

    def explanation_view(self, session_id: str, poi: PoiId) -> dict[str, Any]:
        session = self.get_session(session_id)
        if poi not in self.dataset.pois:
            raise UnknownItem(poi)
        with session.lock:
            _, map_state = beam_update(
                session.distribution, ResponseVector({}), self.params, None
            )
            working = ExplorationState(map_state.members | session.profile.confirmed.members)
        explanation = build_explanation(self.dataset.relation, poi, working, self.dataset.edge_texts)
        return explanation_to_dict(explanation)

    def snapshot(self, path: str | Path) -> None:
        """Persist every session as JSON (used at shutdown)."""
        doc = {
            "relation_version": self.relation_version,
            "sessions": [session_to_dict(s) for s in self.sessions.values()],
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def restore(self, path: str | Path) -> None:
        doc = json.loads(Path(path).read_text())
        for raw in doc.get("sessions", []):
            session = session_from_dict(raw, self.dataset, self.config)
            self.sessions[session.session_id] = session


def explanation_to_dict(explanation: Explanation) -> dict[str, Any]:
    return {
        "target": explanation.target,
        "chain": list(explanation.chain),
        "justifications": [
            {"from": a, "to": b, "text": text}
            for (a, b), text in explanation.justifications.items()
        ],
        "summary": explanation.summary,
    }


def recommendation_to_dict(rec: Recommendation) -> dict[str, Any]:
    return {
        "mode": rec.mode,
        "complete": rec.complete,
        "notice": rec.notice,
        "value": rec.value,
        "approximate": rec.approximate,
        "working_state": sorted(rec.working_state.members),
        "items": [
            {
                "poi": step.poi,
                "interest": step.interest,
                "explanation": explanation_to_dict(step.explanation),
                **(
                    {
                        "diversity": step.ranked.diversity,
                        "novelty": step.ranked.novelty,
                        "total": step.ranked.total,
                        "serendipitous": step.ranked.serendipitous,
                    }
                    if step.ranked
                    else {}
                ),
            }
            for step in rec.steps
        ],
    }


def session_to_dict(session: Session) -> dict[str, Any]:
    profile = session.profile
    return {
        "session_id": session.session_id,
        "user_id": profile.user_id,
        "mode": session.mode,
        "relation_version": session.relation_version,
        "confirmed": sorted(profile.confirmed.members),
        "prefs": dict(sorted(profile.prefs.items())),
        "interactions": profile.interactions,
        "schedule_weights": profile.schedule_weights,
        "interests": list(profile.interests),
        "distribution": dict(sorted(session.distribution.support.items())),
    }


def session_from_dict(raw: Mapping[str, Any], dataset: Dataset, config: EngineConfig) -> Session:
    rel = dataset.relation
    confirmed = ExplorationState(frozenset(raw.get("confirmed", ())))
    profile = UserProfile(
        user_id=raw["user_id"],
        confirmed=confirmed,
        prefs={k: float(v) for k, v in raw.get("prefs", {}).items()},
        weights=InterestWeights(
            w_alpha=config.w_alpha, w_beta=config.w_beta,
            w_gamma=config.w_gamma, w_delta=config.w_delta,
            prop_weights=config.prop_weights,
        ),
        learning_rate=config.learning_rate,
        kappa=config.kappa,
        tau=config.tau,
        interactions=int(raw.get("interactions", 0)),
        schedule_weights=bool(raw.get("schedule_weights", False)),
        interests=tuple(raw.get("interests", ())),
        prior=ConstantPrior(config.preference_prior),
    )
    support = raw.get("distribution")
    if support:
        distribution = StateDistribution(rel=rel, support={k: float(v) for k, v in support.items()})
    else:
        distribution = initial_distribution(rel, config.enumeration_budget, config.beam_width or 500)
    inner = UserSession(
        rel=rel,
        profile=profile,
        distribution=distribution,
        counters=init_counters(rel, confirmed),
    )
    return Session(
        session_id=raw.get("session_id") or uuid.uuid4().hex[:12],
        inner=inner,
        mode=raw.get("mode", MODE_PATH),
        relation_version=int(raw.get("relation_version", 1)),
    )
