"""End-to-end walkthrough on the bundled five-POI instance.

Drives the real pipeline -- archetype cold start, a confirmed first visit,
fringe construction, interest scoring, path planning, and one feedback
cycle -- and collects every intermediate number so the CLI can print the
full trace and the acceptance suite can assert it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .dataset import Dataset, dataset_from_dict
from .lattice import ExplorationState, PoiId, count_ideals, fringe, state_key
from .oracle import enumerate_ideals
from .planner import PlanRequest, plan_path
from .service import RecommendationService, Recommendation, recommendation_to_dict

DEMO_ARCHETYPE = "Historical Researcher"
COMPANION_ARCHETYPE = "Cultural Discoverer"


def bundled_dataset() -> Dataset:
    text = resources.files("esrs.data").joinpath("five_poi.json").read_text()
    return dataset_from_dict(json.loads(text))


@dataclass
class TraceResult:
    items: list[PoiId]
    hasse: list[tuple[PoiId, PoiId]]
    ideal_count: int
    ideals: list[str]
    principal_ideals: dict[PoiId, list[PoiId]]
    fringes: dict[str, list[PoiId]]
    interest_at_start: dict[PoiId, float]
    excluded: list[PoiId]
    blocked: list[PoiId]
    intermediate_interest: dict[tuple[PoiId, str], float]
    memo: dict[tuple[str, int], float]
    memo_pred: dict[tuple[str, int], PoiId]
    path: tuple[PoiId, ...]
    value: float
    recommendation: Recommendation
    pref_before: float
    pref_after: float
    confirmed_after: list[PoiId]
    fringe_after: list[PoiId]
    map_after: list[PoiId]
    explanations: dict[PoiId, list[PoiId]] = field(default_factory=dict)


def trace_example() -> TraceResult:
    dataset = bundled_dataset()
    service = RecommendationService(dataset)
    rel = dataset.relation

    companion = service.create_session(
        {"strategy": "archetype", "archetype": COMPANION_ARCHETYPE, "user_id": "companion"}
    )
    demo = service.create_session(
        {"strategy": "archetype", "archetype": DEMO_ARCHETYPE, "user_id": "demo"}
    )
    assert companion.session_id != demo.session_id

    # The walkthrough starts with the museum already confirmed.
    service.submit_event(demo.session_id, "q1", checkin=True, timestamp="2026-05-01T10:00:00")

    ideals = enumerate_ideals(rel)
    empty = ExplorationState(frozenset())
    state_q1 = ExplorationState(frozenset({"q1"}))
    state_q1q2 = ExplorationState(frozenset({"q1", "q2"}))
    state_q1q4 = ExplorationState(frozenset({"q1", "q4"}))

    fringes = {
        state.key: sorted(fringe(rel, state))
        for state in (empty, state_q1, state_q1q2, state_q1q4)
    }

    score = service.interest_function(demo)
    interest_at_start = {q: score(q, state_q1.members) for q in ("q2", "q4")}
    intermediate = {
        ("q3", state_q1q2.key): score("q3", state_q1q2.members),
        ("q4", state_q1q2.key): score("q4", state_q1q2.members),
        ("q2", state_q1q4.key): score("q2", state_q1q4.members),
        ("q5", state_q1q4.key): score("q5", state_q1q4.members),
    }

    plan = plan_path(PlanRequest(start=state_q1, k_max=2, beam=None), score, rel)
    memo = {(entry.state_key, entry.horizon): entry.value for entry in plan.trace}
    memo_pred = {
        (entry.state_key, entry.horizon): entry.pred
        for entry in plan.trace
        if entry.pred is not None
    }

    recommendation = service.recommend(demo.session_id, mode="path", k_max=2)
    explanations = {
        step.poi: list(step.explanation.chain) for step in recommendation.steps
    }

    pref_before = demo.profile.prefs["q4"]
    service.submit_event(
        demo.session_id, "q4", rating=4.5, timestamp="2026-05-01T13:00:00"
    )
    pref_after = demo.profile.prefs["q4"]
    map_after = demo.distribution.map_state()

    return TraceResult(
        items=list(rel.items),
        hasse=list(rel.hasse),
        ideal_count=count_ideals(rel),
        ideals=[s.key for s in ideals],
        principal_ideals={q: sorted(rel.down(q)) for q in rel.items},
        fringes=fringes,
        interest_at_start=interest_at_start,
        excluded=["q1"],
        blocked=["q3", "q5"],
        intermediate_interest=intermediate,
        memo=memo,
        memo_pred=memo_pred,
        path=plan.path,
        value=plan.value,
        recommendation=recommendation,
        pref_before=pref_before,
        pref_after=pref_after,
        confirmed_after=sorted(demo.profile.confirmed.members),
        fringe_after=sorted(demo.counters.fringe),
        map_after=sorted(map_after.members),
        explanations=explanations,
    )


def format_trace(result: TraceResult) -> str:
    lines: list[str] = []
    out = lines.append
    out("Five-POI walkthrough")
    out("=" * 60)
    out(f"Items: {', '.join(result.items)}")
    out("Covering edges: " + ", ".join(f"{p} -> {q}" for p, q in result.hasse))
    out(f"Valid states: {result.ideal_count}")
    out("")
    out("Principal ideals:")
    for q, ideal in result.principal_ideals.items():
        out(f"  down({q}) = {{{', '.join(ideal)}}}")
    out("")
    out("Fringes:")
    for key, frontier in result.fringes.items():
        label = "{}" if not key else "{" + key + "}"
        out(f"  Fringe({label}) = {{{', '.join(frontier)}}}")
    out("")
    out("Interest at state {q1} (equal weights 0.25):")
    for q, value in sorted(result.interest_at_start.items()):
        out(f"  I({q}) = {value:.4f}")
    out(f"  excluded (visited): {', '.join(result.excluded)}")
    out(f"  blocked (outside fringe): {', '.join(result.blocked)}")
    out("")
    out("Interest at intermediate states:")
    for (q, key), value in sorted(result.intermediate_interest.items(), key=lambda kv: kv[0][1]):
        out(f"  I({q} | {{{key}}}) = {value:.4f}")
    out("")
    out("Memoized DP (start {q1}, horizon 2, unbounded beam):")
    for (key, horizon), value in sorted(result.memo.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        pred = result.memo_pred.get((key, horizon))
        suffix = f"  [next={pred}]" if pred else ""
        out(f"  V({{{key}}}, {horizon}) = {value:.4f}{suffix}")
    out(f"  optimal path: ({', '.join(result.path)})   value = {result.value:.4f}")
    out("")
    out("Explanations:")
    for poi, chain in result.explanations.items():
        shown = ", ".join(chain) if chain else "no prerequisites"
        out(f"  {poi}: chain ({shown})")
    out("")
    out("Feedback: high-confidence rating on q4 (intensity 0.9)")
    out(f"  preference q4: {result.pref_before:.4f} -> {result.pref_after:.4f}")
    out(f"  confirmed state: {{{', '.join(result.confirmed_after)}}}")
    out(f"  fringe: {{{', '.join(result.fringe_after)}}}")
    out(f"  MAP state: {{{', '.join(result.map_after)}}}")
    return "\n".join(lines)


def trace_as_dict(result: TraceResult) -> dict[str, Any]:
    return {
        "items": result.items,
        "hasse": [list(e) for e in result.hasse],
        "ideal_count": result.ideal_count,
        "ideals": result.ideals,
        "principal_ideals": result.principal_ideals,
        "fringes": result.fringes,
        "interest_at_start": result.interest_at_start,
        "intermediate_interest": {
            f"{q}|{key}": value for (q, key), value in result.intermediate_interest.items()
        },
        "memo": {f"{key}|{horizon}": value for (key, horizon), value in result.memo.items()},
        "path": list(result.path),
        "value": result.value,
        "recommendation": recommendation_to_dict(result.recommendation),
        "pref_before": result.pref_before,
        "pref_after": result.pref_after,
        "confirmed_after": result.confirmed_after,
        "fringe_after": result.fringe_after,
        "map_after": result.map_after,
    }
