"""Tests for the rank-selection cost, argmin rule, and sub-filter views."""

import numpy as np
import pytest

from jiobeam import (ConfigError, extract_subfilters, init_rank_adapt_rls,
                     init_rank_adapt_sg, rank_cost_update, select_rank,
                     steering_vector)
from jiobeam.rank_adapt import rank_adapt_step, selected_filters, selected_outputs
from jiobeam.jio import reduce


def rand_vec(rng, m):
    return rng.standard_normal(m) + 1j * rng.standard_normal(m)


def fresh_state(m=10, d_min=3, d_max=8, alpha=0.9, variant="sg"):
    a = steering_vector(100.0, m)
    if variant == "sg":
        return init_rank_adapt_sg(a, 0.002, 0.005, d_min, d_max, alpha), a
    return init_rank_adapt_rls(a, alpha, 50.0, 50.0, d_min, d_max), a


def subrank_output(state, r, d):
    sub = extract_subfilters(state, d)
    return np.vdot(sub["w_bar"], reduce(sub["s"], r))


class TestCostUpdate:
    def test_first_snapshot_sets_instantaneous_power(self):
        state, _ = fresh_state(alpha=0.7)
        rng = np.random.default_rng(0)
        r = rand_vec(rng, 10)
        new = rank_cost_update(state, r)
        for j, d in enumerate(range(3, 9)):
            assert new.costs[j] == pytest.approx(abs(subrank_output(state, r, d)) ** 2)

    def test_zero_forgetting_keeps_only_latest(self):
        state, _ = fresh_state(alpha=0.0)
        rng = np.random.default_rng(1)
        for _ in range(5):
            r = rand_vec(rng, 10)
            state = rank_cost_update(state, r)
        for j, d in enumerate(range(3, 9)):
            assert state.costs[j] == pytest.approx(abs(subrank_output(state, r, d)) ** 2)

    def test_matches_brute_force_weighted_sum(self):
        # direct-sum oracle over a fixed stream with fixed filters
        alpha = 0.85
        state, _ = fresh_state(alpha=alpha)
        rng = np.random.default_rng(2)
        snaps = [rand_vec(rng, 10) for _ in range(12)]
        for r in snaps:
            state = rank_cost_update(state, r)
        n = len(snaps)
        for j, d in enumerate(range(3, 9)):
            brute = sum(alpha ** (n - 1 - l) * abs(subrank_output(state, snaps[l], d)) ** 2
                        for l in range(n))
            assert state.costs[j] == pytest.approx(brute, rel=1e-12)

    def test_bounded_by_geometric_sum(self):
        alpha = 0.95
        state, _ = fresh_state(alpha=alpha)
        rng = np.random.default_rng(3)
        peak = np.zeros(6)
        for _ in range(400):
            r = rand_vec(rng, 10)
            state = rank_cost_update(state, r)
            y = np.array([abs(subrank_output(state, r, d)) ** 2 for d in range(3, 9)])
            peak = np.maximum(peak, y)
        assert np.all(state.costs <= peak / (1 - alpha) + 1e-9)

    def test_cost_update_does_not_mutate_filters(self):
        state, _ = fresh_state()
        rng = np.random.default_rng(4)
        s_before = state.core.s.copy()
        w_before = state.core.w_bar.copy()
        rank_cost_update(state, rand_vec(rng, 10))
        np.testing.assert_array_equal(state.core.s, s_before)
        np.testing.assert_array_equal(state.core.w_bar, w_before)


class TestSelectRank:
    def test_all_equal_breaks_to_minimum_rank(self):
        state, _ = fresh_state()
        state.costs[:] = 4.2
        assert select_rank(state) == 3

    def test_monotone_decreasing_selects_maximum(self):
        state, _ = fresh_state()
        state.costs[:] = np.arange(6, 0, -1)
        assert select_rank(state) == 8

    def test_invariant_under_positive_scaling(self):
        state, _ = fresh_state()
        rng = np.random.default_rng(5)
        state.costs[:] = rng.uniform(0.1, 3.0, 6)
        before = select_rank(state)
        state.costs[:] *= 17.5
        assert select_rank(state) == before


class TestExtractSubfilters:
    def test_top_rank_is_identity_extraction(self):
        state, _ = fresh_state(variant="rls")
        sub = extract_subfilters(state, 8)
        np.testing.assert_array_equal(sub["s"], state.core.s)
        np.testing.assert_array_equal(sub["w_bar"], state.core.w_bar)
        np.testing.assert_array_equal(sub["p_bar"], state.core.p_bar)

    def test_leading_slices(self):
        state, a = fresh_state(variant="rls", d_min=1)
        rng = np.random.default_rng(6)
        for _ in range(10):
            state = rank_adapt_step(state, rand_vec(rng, 10), a, 0, "rls")
        sub = extract_subfilters(state, 3)
        np.testing.assert_array_equal(sub["s"], state.core.s[:, :3])
        np.testing.assert_array_equal(sub["w_bar"], state.core.w_bar[:3])
        np.testing.assert_array_equal(sub["a_bar"], state.core.a_bar[:3])
        np.testing.assert_array_equal(sub["p_bar"], state.core.p_bar[:3, :3])

    def test_out_of_range_rank_rejected(self):
        state, _ = fresh_state()
        with pytest.raises(ConfigError):
            extract_subfilters(state, 2)
        with pytest.raises(ConfigError):
            extract_subfilters(state, 9)

    def test_sg_variant_has_no_reduced_covariance(self):
        state, _ = fresh_state(variant="sg")
        assert extract_subfilters(state, 4)["p_bar"] is None


class TestAdaptiveStep:
    def test_selected_rank_stays_in_range(self):
        state, a = fresh_state(variant="rls")
        rng = np.random.default_rng(7)
        for i in range(50):
            state = rank_adapt_step(state, rand_vec(rng, 10), a, i, "rls")
            assert 3 <= int(state.d_current) <= 8

    def test_freeze_stops_reselection(self):
        state, a = fresh_state(variant="sg")
        state.freeze_after = 5
        rng = np.random.default_rng(8)
        frozen = None
        for i in range(30):
            state = rank_adapt_step(state, rand_vec(rng, 10), a, i, "sg")
            if i == 5:
                frozen = int(state.d_current)
            if i > 5:
                assert int(state.d_current) == frozen

    def test_selected_outputs_and_filters_agree(self):
        state, a = fresh_state(variant="rls")
        rng = np.random.default_rng(9)
        for i in range(10):
            r = rand_vec(rng, 10)
            state = rank_adapt_step(state, r, a, i, "rls")
        r = rand_vec(rng, 10)
        d = int(state.d_current)
        sub = extract_subfilters(state, d)
        direct = np.vdot(sub["w_bar"], reduce(sub["s"], r))
        assert selected_outputs(state, r) == pytest.approx(direct, abs=1e-12)
        w_eff = selected_filters(state)
        assert np.vdot(w_eff, r) == pytest.approx(direct, abs=1e-12)
