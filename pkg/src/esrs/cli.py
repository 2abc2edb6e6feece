"""Command-line entry points.

Subcommands: trace-example, infer-surmise, recommend, em-fit, simulate,
serve.  All of them resolve configuration through the dataset document and
the ESRS_CONFIG override file.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .blim import BlimParams, em_fit
from .dataset import ingest_trajectories, load_dataset, load_response_sequences
from .service import (
    MODE_PATH,
    MODE_RANK,
    RecommendationService,
    recommendation_to_dict,
    session_from_dict,
    session_to_dict,
)
from .surmise import InferenceConfig, infer_surmise
from .trace import bundled_dataset, format_trace, trace_as_dict, trace_example


def _load_dataset_arg(path: str | None):
    if path is None:
        return bundled_dataset()
    return load_dataset(path)


def cmd_trace_example(args: argparse.Namespace) -> int:
    result = trace_example()
    if args.json:
        print(json.dumps(trace_as_dict(result), indent=2, sort_keys=True))
    else:
        print(format_trace(result))
    return 0


def cmd_infer_surmise(args: argparse.Namespace) -> int:
    trajectories, rejected = ingest_trajectories(args.trajectories)
    for line in rejected:
        print(f"rejected line {line.line_number}: {line.reason}", file=sys.stderr)
    config = InferenceConfig(
        min_support=args.min_support,
        confidence_threshold=args.confidence,
        significance_alpha=args.alpha,
        review_threshold=args.review_threshold,
    )
    items = None
    if args.items:
        items = [line.strip() for line in Path(args.items).read_text().splitlines() if line.strip()]
    relation, flags = infer_surmise(trajectories, config, items=items)
    print(f"items: {len(relation.items)}  covering edges: {len(relation.hasse)}")
    for p, q in relation.hasse:
        print(f"  {p} -> {q}")
    if args.out:
        doc = {
            "items": list(relation.items),
            "hasse_edges": [list(e) for e in relation.hasse],
        }
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
        print(f"relation written to {args.out}")
    if args.review_file:
        Path(args.review_file).write_text(
            json.dumps([f.to_dict() for f in flags], indent=2) + "\n"
        )
        print(f"{len(flags)} edges flagged for review -> {args.review_file}")
    elif flags:
        print(f"{len(flags)} edges flagged for review (pass --review-file to persist)")
    return 0


def cmd_recommend(args: argparse.Namespace) -> int:
    dataset = _load_dataset_arg(args.dataset)
    service = RecommendationService(dataset)
    raw = json.loads(Path(args.session_file).read_text())
    session = session_from_dict(raw, dataset, service.config)
    service.sessions[session.session_id] = session
    rec = service.recommend(session.session_id, mode=args.mode, k_max=args.k, beam=args.beam)
    print(json.dumps(recommendation_to_dict(rec), indent=2, sort_keys=True))
    Path(args.session_file).write_text(
        json.dumps(session_to_dict(session), indent=2, sort_keys=True) + "\n"
    )
    return 0


def cmd_em_fit(args: argparse.Namespace) -> int:
    dataset = _load_dataset_arg(args.dataset)
    sequences = load_response_sequences(args.responses)
    init = BlimParams.uniform(
        dataset.relation.items, dataset.config.default_beta, dataset.config.default_eta
    )
    result = em_fit(
        sequences,
        dataset.relation,
        init,
        max_iters=args.max_iters,
        tol=args.tol,
        enumeration_budget=dataset.config.enumeration_budget,
        beam_width=args.beam,
        tie_rates=args.tie_rates,
    )
    print(f"iterations: {len(result.trace)}  converged: {result.converged}")
    print(f"final log-likelihood: {result.trace[-1]:.6f}")
    for item in dataset.relation.items:
        print(f"  {item}: beta={result.params.beta[item]:.4f}  eta={result.params.eta[item]:.4f}")
    for event in result.clamp_events:
        print(f"  note: {event}")
    if args.out:
        doc = {
            "beta": result.params.beta,
            "eta": result.params.eta,
            "prior": result.prior.support,
            "log_likelihood": result.trace,
        }
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"parameters written to {args.out}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    dataset = _load_dataset_arg(args.dataset)
    service = RecommendationService(dataset)
    rng = random.Random(args.seed)
    session = service.create_session({"strategy": "decline", "user_id": f"sim-{args.seed}"})
    print(f"session {session.session_id} over {len(dataset.relation.items)} POIs")
    for step in range(args.steps):
        rec = service.recommend(session.session_id, mode=args.mode, k_max=3)
        if rec.complete:
            print(f"step {step}: exploration complete")
            break
        choices = [s.poi for s in rec.steps]
        pick = rng.choice(choices)
        record = service.submit_event(
            session.session_id, pick, dwell_minutes=45.0,
            timestamp=f"2026-06-01T{10 + step:02d}:00:00",
        )
        print(
            f"step {step}: offered {choices}, visited {pick}, "
            f"confirmed {{{record['confirmed']}}}, fringe {record['fringe']}"
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import create_app

    dataset = _load_dataset_arg(args.dataset)
    service = RecommendationService(dataset, audit_log=args.audit_log)
    if args.snapshot and Path(args.snapshot).exists():
        service.restore(args.snapshot)
    app = create_app(service)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        if args.snapshot:
            service.snapshot(args.snapshot)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="esrs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace-example", help="print the five-POI walkthrough tables")
    p.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    p.set_defaults(func=cmd_trace_example)

    p = sub.add_parser("infer-surmise", help="infer the prerequisite order from trajectories")
    p.add_argument("trajectories", help="JSONL trajectory log")
    p.add_argument("--items", help="optional newline-separated item list")
    p.add_argument("--min-support", type=int, default=20)
    p.add_argument("--confidence", type=float, default=0.6)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--review-threshold", type=float, default=0.9)
    p.add_argument("--out", help="write the inferred relation JSON here")
    p.add_argument("--review-file", help="write flagged edges here")
    p.set_defaults(func=cmd_infer_surmise)

    p = sub.add_parser("recommend", help="run one recommendation cycle for a session file")
    p.add_argument("--session-file", required=True)
    p.add_argument("--dataset", help="dataset JSON (default: bundled five-POI)")
    p.add_argument("--mode", choices=[MODE_PATH, MODE_RANK], default=MODE_PATH)
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--beam", type=int, default=None)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("em-fit", help="fit signal-noise rates from a response log")
    p.add_argument("responses", help="JSONL response log")
    p.add_argument("--dataset", help="dataset JSON (default: bundled five-POI)")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--beam", type=int, default=None)
    p.add_argument("--tie-rates", action="store_true",
                   help="fit one shared beta/eta instead of per-item rates")
    p.add_argument("--out", help="write fitted parameters here")
    p.set_defaults(func=cmd_em_fit)

    p = sub.add_parser("simulate", help="scripted user over a dataset")
    p.add_argument("--dataset", help="dataset JSON (default: bundled five-POI)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--mode", choices=[MODE_PATH, MODE_RANK], default=MODE_RANK)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the HTTP session API")
    p.add_argument("--dataset", help="dataset JSON (default: bundled five-POI)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--snapshot", help="session snapshot file (loaded at start, saved at exit)")
    p.add_argument("--audit-log", help="append every feedback audit record to this JSONL file")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
