#!/usr/bin/env python3
"""Planted-order recovery experiment.

Samples uniform linear extensions of the five-POI order, runs the inference
pipeline over a grid of corpus sizes, and reports how often the planted
covering relations are recovered without spurious covers surviving review.
"""

from __future__ import annotations

import argparse
import random

from esrs.lattice import build_relation
from esrs.surmise import InferenceConfig, Trajectory, infer_surmise

ITEMS = ["q1", "q2", "q3", "q4", "q5"]
PLANTED = [("q1", "q4"), ("q4", "q5"), ("q2", "q3")]


def sample_corpus(rel, rng: random.Random, n: int) -> list[Trajectory]:
    rows = []
    for t in range(n):
        while True:
            perm = ITEMS[:]
            rng.shuffle(perm)
            pos = {q: i for i, q in enumerate(perm)}
            if all(pos[a] < pos[b] for a in ITEMS for b in ITEMS
                   if a != b and rel.leq(a, b)):
                break
        visits = tuple((q, f"2026-01-01T{i:02d}:00:00") for i, q in enumerate(perm))
        rows.append(Trajectory(user_id=f"u{t}", visits=visits))
    return rows


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 250, 500, 1000])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rel = build_relation(ITEMS, PLANTED)
    config = InferenceConfig(min_support=20, confidence_threshold=0.6,
                             significance_alpha=0.01, review_threshold=0.9)
    rng = random.Random(args.seed)
    planted = set(PLANTED)
    for size in args.sizes:
        exact = contains = 0
        for _ in range(args.trials):
            corpus = sample_corpus(rel, rng, size)
            inferred, flags = infer_surmise(corpus, config)
            strict = {(p, q) for p, q in inferred.closure_pairs() if p != q}
            contains += planted <= strict
            exact += set(inferred.hasse) == planted
        print(
            f"n={size:5d}: planted covers present {contains}/{args.trials}, "
            f"exact Hasse recovery {exact}/{args.trials}"
        )
    print(
        "note: the cross-chain pairs sit at confidence 0.9 in expectation, "
        "exactly the review threshold, so exact recovery is a coin flip per pair"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
