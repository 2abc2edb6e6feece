from __future__ import annotations

import random
from itertools import combinations

import pytest
from hypothesis import given, settings

from esrs.errors import ComponentTooLarge, CycleDetected, InvalidState, NotInFringe, UnknownItem
from esrs.lattice import (
    ExplorationState,
    build_relation,
    count_ideals,
    fringe,
    fringe_incremental,
    init_counters,
    is_valid_state,
    iter_ideals_bfs,
    principal_ideal,
    state_key,
    well_graded_chain,
)
from esrs.oracle import enumerate_ideals

from .conftest import random_relation, relations, state


class TestBuildRelation:
    def test_five_poi_closure_and_hasse(self, five_poi):
        # closure adds the transitive pair (q1, q5); Hasse keeps the 3 inputs
        assert five_poi.leq("q1", "q5")
        assert set(five_poi.hasse) == {("q1", "q4"), ("q4", "q5"), ("q2", "q3")}

    def test_singleton(self):
        rel = build_relation(["a"], [])
        assert rel.leq("a", "a")
        assert rel.hasse == ()

    def test_two_cycle_rejected(self):
        with pytest.raises(CycleDetected) as info:
            build_relation(["a", "b"], [("a", "b"), ("b", "a")])
        cycle = info.value.cycle
        assert cycle[0] == cycle[-1]
        assert set(cycle) == {"a", "b"}

    def test_longer_cycle_reported(self):
        with pytest.raises(CycleDetected) as info:
            build_relation(list("abcd"), [("a", "b"), ("b", "c"), ("c", "a")])
        assert info.value.cycle[0] == info.value.cycle[-1]

    def test_self_loop_rejected(self):
        with pytest.raises(CycleDetected):
            build_relation(["a"], [("a", "a")])

    def test_unknown_edge_endpoint(self):
        with pytest.raises(UnknownItem):
            build_relation(["a"], [("a", "b")])

    def test_empty_items_rejected(self):
        with pytest.raises(ValueError):
            build_relation([], [])

    def test_duplicate_items_rejected(self):
        with pytest.raises(ValueError):
            build_relation(["a", "a"], [])

    def test_redundant_transitive_edge_not_covering(self):
        rel = build_relation(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")])
        assert set(rel.hasse) == {("a", "b"), ("b", "c")}


class TestPrincipalIdeal:
    def test_five_poi_ideals(self, five_poi):
        assert principal_ideal(five_poi, "q5") == {"q1", "q4", "q5"}
        assert principal_ideal(five_poi, "q2") == {"q2"}
        assert principal_ideal(five_poi, "q3") == {"q2", "q3"}

    def test_minimal_element(self, five_poi):
        for m in five_poi.minimal_elements():
            assert principal_ideal(five_poi, m) == {m}

    def test_unknown_item(self, five_poi):
        with pytest.raises(UnknownItem):
            principal_ideal(five_poi, "zz")


class TestIsValidState:
    def test_examples(self, five_poi):
        assert is_valid_state(five_poi, {"q1", "q4"})
        assert not is_valid_state(five_poi, {"q4"})
        assert is_valid_state(five_poi, set())
        assert is_valid_state(five_poi, set(five_poi.items))

    def test_unknown_member(self, five_poi):
        with pytest.raises(UnknownItem):
            is_valid_state(five_poi, {"zz"})


class TestFringe:
    def test_examples(self, five_poi):
        assert fringe(five_poi, state("q1")) == {"q2", "q4"}
        assert fringe(five_poi, state()) == {"q1", "q2"}
        assert fringe(five_poi, state(*five_poi.items)) == frozenset()

    def test_invalid_state_rejected(self, five_poi):
        with pytest.raises(InvalidState):
            fringe(five_poi, state("q4"))

    @settings(max_examples=60, deadline=None)
    @given(relations(max_n=10))
    def test_fringe_characterization(self, rel):
        # q is in the fringe of K exactly when K + q is still a valid state
        for st_ in enumerate_ideals(rel):
            frontier = fringe(rel, st_)
            for q in rel.items:
                if q in st_.members:
                    continue
                assert (q in frontier) == is_valid_state(rel, st_.members | {q})


class TestFringeIncremental:
    def test_worked_step(self, five_poi):
        counters = init_counters(five_poi, state("q1"))
        assert counters.fringe == {"q2", "q4"}
        assert counters.cnt["q5"] == 1
        fringe_incremental(counters, five_poi, "q4")
        assert counters.cnt["q5"] == 0
        assert counters.fringe == {"q2", "q5"}

    def test_maximal_element_shrinks_fringe(self, five_poi):
        counters = init_counters(five_poi, state("q1", "q4"))
        before = set(counters.fringe)
        fringe_incremental(counters, five_poi, "q5")
        assert counters.fringe == before - {"q5"}

    def test_not_in_fringe(self, five_poi):
        counters = init_counters(five_poi, state("q1"))
        with pytest.raises(NotInFringe):
            fringe_incremental(counters, five_poi, "q5")

    def test_matches_batch_on_random_addition_sequences(self):
        rng = random.Random(42)
        for _ in range(30):
            rel = random_relation(rng, 8, rng.choice([0.15, 0.3, 0.5]))
            counters = init_counters(rel, state())
            members: set[str] = set()
            while counters.fringe:
                added = rng.choice(sorted(counters.fringe))
                fringe_incremental(counters, rel, added)
                members.add(added)
                assert counters.fringe == fringe(rel, ExplorationState(frozenset(members)))


class TestWellGradedChain:
    def test_examples(self, five_poi):
        assert well_graded_chain(five_poi, state("q1", "q4", "q5")) == ["q1", "q4", "q5"]
        assert well_graded_chain(five_poi, state()) == []
        assert well_graded_chain(five_poi, state("q2")) == ["q2"]

    @settings(max_examples=40, deadline=None)
    @given(relations(max_n=8))
    def test_every_prefix_valid_and_in_fringe(self, rel):
        for st_ in enumerate_ideals(rel):
            chain = well_graded_chain(rel, st_)
            assert len(chain) == len(st_.members)
            prefix: set[str] = set()
            for item in chain:
                assert item in fringe(rel, ExplorationState(frozenset(prefix)))
                prefix.add(item)
                assert is_valid_state(rel, prefix)


class TestCountIdeals:
    def test_five_poi(self, five_poi):
        assert count_ideals(five_poi) == 12

    def test_antichain(self):
        rel = build_relation([f"a{i}" for i in range(6)], [])
        assert count_ideals(rel) == 64

    def test_five_chains_of_three(self):
        items, edges = [], []
        for c in range(5):
            chain = [f"c{c}x{i}" for i in range(3)]
            items.extend(chain)
            edges.extend(zip(chain, chain[1:]))
        rel = build_relation(items, edges)
        assert count_ideals(rel) == 4 ** 5

    def test_component_cap(self):
        n = 21
        items = [f"b{i:02d}" for i in range(n)]
        # star: one root below everything else -> single non-chain component
        edges = [(items[0], items[i]) for i in range(1, n)]
        rel = build_relation(items, edges)
        with pytest.raises(ComponentTooLarge):
            count_ideals(rel)

    def test_matches_enumeration(self):
        rng = random.Random(7)
        for _ in range(40):
            rel = random_relation(rng, rng.randint(1, 12), rng.choice([0.0, 0.15, 0.3, 0.6]))
            assert count_ideals(rel) == len(enumerate_ideals(rel))


class TestLatticeProperties:
    @settings(max_examples=60, deadline=None)
    @given(relations(max_n=8))
    def test_union_intersection_closure(self, rel):
        ideals = [s.members for s in enumerate_ideals(rel)]
        for a, b in combinations(ideals, 2):
            assert is_valid_state(rel, a | b)
            assert is_valid_state(rel, a & b)

    @settings(max_examples=30, deadline=None)
    @given(relations(max_n=8))
    def test_gradedness(self, rel):
        # every maximal chain between comparable states steps one item at a time
        ideals = [s.members for s in enumerate_ideals(rel)]
        for low in ideals:
            for high in ideals:
                if not low < high:
                    continue
                # BFS over single-item valid additions inside `high`
                distance = {low: 0}
                frontier = [low]
                while frontier:
                    nxt = []
                    for cur in frontier:
                        for q in high - cur:
                            grown = cur | {q}
                            if grown <= high and is_valid_state(rel, grown) and grown not in distance:
                                distance[grown] = distance[cur] + 1
                                nxt.append(grown)
                    frontier = nxt
                assert distance.get(high) == len(high) - len(low)

    @settings(max_examples=30, deadline=None)
    @given(relations(max_n=8))
    def test_join_irreducibles_are_principal_ideals(self, rel):
        ideals = [s.members for s in enumerate_ideals(rel)]
        principal = {frozenset(rel.down(q)) for q in rel.items}
        irreducible = set()
        for target in ideals:
            if not target:
                continue
            decomposable = any(
                a | b == target
                for a, b in combinations([i for i in ideals if i < target], 2)
            )
            if not decomposable:
                irreducible.add(target)
        assert irreducible == principal

    def test_bfs_enumeration_matches_oracle(self):
        rng = random.Random(11)
        for _ in range(25):
            rel = random_relation(rng, rng.randint(1, 9), rng.choice([0.1, 0.3, 0.5]))
            bfs = {s.key for s in iter_ideals_bfs(rel)}
            assert bfs == {s.key for s in enumerate_ideals(rel)}

    def test_bfs_limit_prefix_of_layer_order(self, five_poi):
        full = iter_ideals_bfs(five_poi)
        limited = iter_ideals_bfs(five_poi, limit=5)
        assert [s.key for s in limited] == [s.key for s in full[:5]]


class TestStateKey:
    def test_key_sorted_and_order_insensitive(self):
        assert state_key(["b", "a"]) == "a,b"
        assert ExplorationState(frozenset({"q4", "q1"})).key == "q1,q4"
        assert ExplorationState(frozenset()).key == ""

    def test_separator_rejected_in_ids(self):
        with pytest.raises(ValueError):
            build_relation(["a,b"], [])
