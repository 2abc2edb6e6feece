from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

from esrs.dataset import Dataset
from esrs.lattice import ExplorationState, SurmiseRelation, build_relation
from esrs.trace import bundled_dataset

FIVE_POI_ITEMS = ["q1", "q2", "q3", "q4", "q5"]
FIVE_POI_EDGES = [("q1", "q4"), ("q4", "q5"), ("q2", "q3")]


@pytest.fixture(scope="session")
def five_poi() -> SurmiseRelation:
    return build_relation(FIVE_POI_ITEMS, FIVE_POI_EDGES)


@pytest.fixture()
def five_poi_dataset() -> Dataset:
    return bundled_dataset()


def state(*members: str) -> ExplorationState:
    return ExplorationState(frozenset(members))


def random_relation(rng: random.Random, n: int, edge_prob: float) -> SurmiseRelation:
    """Random poset over n items: edges only go from lower to higher index,
    so the input is a DAG by construction."""
    items = [f"p{i:02d}" for i in range(n)]
    edges = [
        (items[i], items[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < edge_prob
    ]
    return build_relation(items, edges)


@st.composite
def relations(draw, min_n: int = 1, max_n: int = 8) -> SurmiseRelation:
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    items = [f"p{i:02d}" for i in range(n)]
    pairs = [(items[i], items[j]) for i in range(n) for j in range(i + 1, n)]
    picks = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [pair for pair, keep in zip(pairs, picks) if keep]
    return build_relation(items, edges)
