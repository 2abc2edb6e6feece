from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esrs.errors import (
    NoNeighbors,
    OutOfRangeObservation,
    UnknownArchetype,
    UnknownItem,
    WeightsNotNormalized,
    ZeroPreferenceVector,
)
from esrs.lattice import EMPTY_STATE
from esrs.user_model import (
    InterestWeights,
    PoiAttributes,
    UserProfile,
    category_relevance,
    collab_score,
    depth_score,
    ema_update,
    interest_score,
    prop_score,
    rel_score,
    stereotype_init,
    validate_centroids,
    weight_schedule,
)

from .conftest import relations, state


def make_profile(**kwargs) -> UserProfile:
    defaults = dict(user_id="u", prefs={})
    defaults.update(kwargs)
    return UserProfile(**defaults)


class TestEmaUpdate:
    def test_worked_example(self):
        profile = make_profile(prefs={"q4": 0.80}, learning_rate=0.1)
        ema_update(profile, "q4", 0.9)
        assert profile.prefs["q4"] == pytest.approx(0.81, abs=1e-12)

    def test_fixed_point(self):
        profile = make_profile(prefs={"a": 0.42})
        ema_update(profile, "a", 0.42)
        assert profile.prefs["a"] == 0.42

    def test_full_replacement(self):
        profile = make_profile(prefs={"a": 0.9}, learning_rate=1.0)
        ema_update(profile, "a", 0.3)
        assert profile.prefs["a"] == pytest.approx(0.3)

    def test_out_of_range(self):
        profile = make_profile(prefs={"a": 0.5})
        with pytest.raises(OutOfRangeObservation):
            ema_update(profile, "a", 1.5)

    def test_other_entries_untouched(self):
        profile = make_profile(prefs={"a": 0.5, "b": 0.7})
        ema_update(profile, "a", 1.0)
        assert profile.prefs["b"] == 0.7

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), max_size=30))
    def test_stays_in_unit_interval(self, observations):
        profile = make_profile(prefs={"a": 0.5}, learning_rate=0.3)
        for obs in observations:
            ema_update(profile, "a", obs)
            assert 0.0 <= profile.prefs["a"] <= 1.0


class TestRelScore:
    def test_worked_values(self, five_poi):
        s1 = state("q1")
        assert rel_score(five_poi, "q4", s1) == pytest.approx(0.5)
        assert rel_score(five_poi, "q5", s1) == pytest.approx(1 / 3)
        assert rel_score(five_poi, "q2", s1) == 0.0
        assert rel_score(five_poi, "q5", state("q1", "q4")) == pytest.approx(2 / 3)

    def test_unknown(self, five_poi):
        with pytest.raises(UnknownItem):
            rel_score(five_poi, "zz", EMPTY_STATE)

    @settings(max_examples=40, deadline=None)
    @given(relations(max_n=10))
    def test_one_iff_member(self, rel):
        from esrs.oracle import enumerate_ideals

        for st_ in enumerate_ideals(rel):
            for q in rel.items:
                score = rel_score(rel, q, st_)
                assert (score == 1.0) == (q in st_.members)
                assert 0.0 <= score <= 1.0


class TestDepthScore:
    def test_five_poi(self, five_poi):
        assert depth_score(five_poi, "q5") == pytest.approx(3 / 5)
        assert depth_score(five_poi, "q1") == pytest.approx(1 / 5)

    def test_chain_top(self):
        from esrs.lattice import build_relation

        rel = build_relation(["a", "b", "c"], [("a", "b"), ("b", "c")])
        assert depth_score(rel, "c") == 1.0


class TestPropScore:
    def attrs(self, pop=0.9, rev=0.6):
        return PoiAttributes(poi="x", popularity=pop, review=rev)

    def test_equal_weights_mean(self):
        value = prop_score(self.attrs(), 0.6, (1 / 3, 1 / 3, 1 / 3))
        assert value == pytest.approx((0.6 + 0.9 + 0.6) / 3, abs=1e-12)

    def test_bounds(self):
        assert prop_score(PoiAttributes(poi="x", popularity=1, review=1), 1.0, (0.2, 0.5, 0.3)) == pytest.approx(1.0)
        assert prop_score(PoiAttributes(poi="x", popularity=0, review=0), 0.0, (0.2, 0.5, 0.3)) == 0.0

    def test_unnormalized_weights(self):
        with pytest.raises(WeightsNotNormalized):
            prop_score(self.attrs(), 0.5, (0.5, 0.5, 0.5))


class TestCollabScore:
    def test_regularized_jaccard_of_empty_states_is_one(self):
        from esrs.user_model import regularized_jaccard

        assert regularized_jaccard(frozenset(), frozenset()) == 1.0

    def test_empty_states_jaccard_is_one(self):
        # two fresh users with identical prefs: hybrid similarity comes out of
        # the cosine branch, and the regularized Jaccard equals 1
        me = make_profile(prefs={"a": 0.5})
        other = make_profile(user_id="v", prefs={"a": 0.5, "b": 0.7})
        value = collab_score(me, "b", [other])
        assert value == pytest.approx(0.7)

    def test_cold_user_with_prefs_gets_positive_signal(self):
        me = make_profile(prefs={"a": 0.4})
        other = make_profile(user_id="v", prefs={"a": 0.6, "b": 0.7})
        assert collab_score(me, "b", [other]) > 0.0

    def test_single_neighbor_weights_cancel(self, five_poi):
        me = make_profile(prefs={"q1": 0.9}, confirmed=state("q1"))
        other = make_profile(user_id="v", prefs={"q1": 0.8, "q4": 0.7})
        assert collab_score(me, "q4", [other]) == pytest.approx(0.7)

    def test_no_neighbors(self):
        with pytest.raises(NoNeighbors):
            collab_score(make_profile(prefs={"a": 0.5}), "a", [])

    def test_zero_pref_cold_user(self):
        me = make_profile(prefs={})
        other = make_profile(user_id="v", prefs={"a": 0.5})
        with pytest.raises(ZeroPreferenceVector):
            collab_score(me, "a", [other])

    def test_cold_user_blend_is_pure_cosine(self):
        # with an empty confirmed state the Jaccard term has zero weight,
        # so scaling a neighbor's shared prefs changes nothing structural
        me = make_profile(prefs={"a": 1.0})
        near = make_profile(user_id="v", prefs={"a": 1.0, "x": 0.8})
        far = make_profile(user_id="w", prefs={"b": 1.0, "x": 0.2})
        value = collab_score(me, "x", [near, far])
        # far has cosine 0 with me, so only near's preference matters
        assert value == pytest.approx(0.8)


class TestInterestScore:
    def test_worked_values(self, five_poi, five_poi_dataset):
        profile = make_profile(
            prefs={"q1": 0.90, "q2": 0.60, "q3": 0.50, "q4": 0.80, "q5": 0.85},
            weights=InterestWeights(prop_weights=(0.0, 0.5, 0.5)),
        )
        attrs = five_poi_dataset.pois
        s1 = state("q1")
        i_q2 = interest_score(profile, five_poi, attrs["q2"], s1, collab=0.65, category_relevance=0.0)
        i_q4 = interest_score(profile, five_poi, attrs["q4"], s1, collab=0.70, category_relevance=0.0)
        assert i_q2 == pytest.approx(0.4875, abs=1e-12)
        assert i_q4 == pytest.approx(0.6875, abs=1e-12)

    def test_all_ones(self, five_poi):
        attrs = PoiAttributes(poi="q1", popularity=1.0, review=1.0)
        profile = make_profile(prefs={"q1": 1.0})
        value = interest_score(profile, five_poi, attrs, state("q1"), 1.0, 1.0)
        assert value == pytest.approx(1.0)

    def test_monotone_in_components(self, five_poi, five_poi_dataset):
        profile = make_profile(prefs={"q4": 0.5})
        attrs = five_poi_dataset.pois["q4"]
        low = interest_score(profile, five_poi, attrs, state("q1"), 0.2, 0.5)
        high = interest_score(profile, five_poi, attrs, state("q1"), 0.9, 0.5)
        assert high > low

    def test_unnormalized_weights(self, five_poi, five_poi_dataset):
        profile = make_profile(weights=InterestWeights(w_alpha=0.5, w_beta=0.5, w_gamma=0.5, w_delta=0.5))
        with pytest.raises(WeightsNotNormalized):
            interest_score(profile, five_poi, five_poi_dataset.pois["q2"], EMPTY_STATE, 0.5, 0.5)

    @given(
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
    )
    def test_range(self, pref, pop, collab, cat):
        from esrs.lattice import build_relation

        rel = build_relation(["a"], [])
        attrs = PoiAttributes(poi="a", popularity=pop, review=pop)
        profile = make_profile(prefs={"a": pref})
        value = interest_score(profile, rel, attrs, EMPTY_STATE, collab, cat)
        assert 0.0 <= value <= 1.0


class TestWeightSchedule:
    BASE = InterestWeights()

    def test_t_zero(self):
        w = weight_schedule(self.BASE, 0, tau=10)
        assert (w.w_alpha, w.w_beta, w.w_gamma, w.w_delta) == (0.0, 1.0, 0.0, 0.0)

    def test_limit(self):
        w = weight_schedule(self.BASE, 10_000, tau=10)
        assert w.w_alpha == pytest.approx(0.25, abs=1e-9)
        assert w.w_beta == pytest.approx(0.25, abs=1e-9)

    def test_at_tau(self):
        w = weight_schedule(self.BASE, 10, tau=10)
        ramp = 1 - math.exp(-1)
        assert w.w_alpha == pytest.approx(0.25 * ramp, abs=1e-12)
        assert w.w_gamma == pytest.approx(0.25 * ramp, abs=1e-12)
        assert w.w_delta == pytest.approx(0.25 * ramp, abs=1e-12)
        assert w.w_beta == pytest.approx(1 - 3 * 0.25 * ramp, abs=1e-12)

    def test_always_normalized(self):
        for t in range(0, 50, 7):
            w = weight_schedule(self.BASE, t, tau=5)
            w.validate()


class TestStereotypeInit:
    CENTROIDS = {"Cultural Discoverer": {"q1": 0.8, "q2": 0.65}}

    def test_lookup(self):
        prefs = stereotype_init("Cultural Discoverer", self.CENTROIDS)
        assert prefs == {"q1": 0.8, "q2": 0.65}
        prefs["q1"] = 0.0  # copies, not aliases
        assert self.CENTROIDS["Cultural Discoverer"]["q1"] == 0.8

    def test_unknown(self):
        with pytest.raises(UnknownArchetype):
            stereotype_init("Bird Watcher", self.CENTROIDS)

    def test_out_of_range_centroid_rejected(self):
        with pytest.raises(ValueError):
            validate_centroids({"x": {"q1": 1.5}})


class TestCategoryRelevance:
    def test_visited_tags_jaccard(self):
        assert category_relevance(["a", "b"], ["b", "c"]) == pytest.approx(1 / 3)

    def test_falls_back_to_interests(self):
        assert category_relevance(["a"], [], ["a"]) == 1.0

    def test_content_prior_default(self):
        assert category_relevance(["a"], [], (), content_prior=0.4) == 0.4
