from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jdsde.errors import ContractError
from jdsde.model import IntensityModel
from jdsde.pathkit import (GridPath, JumpTimes, RngStream, brownian_bridge_mean, cross_sum,
                           dump_path_csv, i_nn, i_ww, levy_wiener, poisson_bridge_mean,
                           poisson_bridge_sample, poisson_bridge_var, poisson_jump_times,
                           simulate_path, wiener_on_grid)


def within(sample, target, k=3.0):
    se = sample.std(ddof=1) / np.sqrt(sample.size)
    return abs(sample.mean() - target) <= k * se


# --- RNG streams -------------------------------------------------------------------

def test_streams_reproduce_and_differ():
    a = RngStream(11, 4).generator().standard_normal(5)
    b = RngStream(11, 4).generator().standard_normal(5)
    c = RngStream(11, 5).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_simulated_path_reproducible():
    lam = IntensityModel.linear(1.0, 2.0, 1.0)
    grid = np.linspace(0, 1, 17)
    p = simulate_path(grid, lam, RngStream(99, 3))
    q = simulate_path(grid, lam, RngStream(99, 3))
    assert np.array_equal(p.w, q.w) and np.array_equal(p.jumps.times, q.jumps.times)


# --- Poisson jump times ------------------------------------------------------------

def counts(intensity, reps, seed=0, method="thinning"):
    rng = np.random.default_rng(seed)
    return np.array([len(poisson_jump_times(intensity, 1.0, rng, method)) for _ in range(reps)], float)


def test_constant_rate_count_mean_and_dispersion():
    n = counts(IntensityModel.constant(2.0), 100_000)
    assert within(n, 2.0)
    sq = (n - 2.0) ** 2
    assert within(sq, 2.0)


def test_linear_rate_count_mean():
    n = counts(IntensityModel.linear(1.0, 1.0, 1.0), 100_000, seed=1)
    assert within(n, 1.5)


def test_inversion_matches_thinning_law():
    n = counts(IntensityModel.linear(1.0, 1.0, 1.0), 50_000, seed=2, method="inversion")
    assert within(n, 1.5)


def test_thinning_detects_low_bound():
    lam = IntensityModel.from_function(lambda t: 1.0 + 9.0 * t, 1.0, lambda_max=2.0)
    with pytest.raises(ContractError):
        for seed in range(20):
            poisson_jump_times(lam, 1.0, np.random.default_rng(seed))


def test_jump_times_in_horizon_and_sorted():
    lam = IntensityModel.constant(20.0)
    jt = poisson_jump_times(lam, 0.5, np.random.default_rng(1))
    assert np.all(np.diff(jt.times) > 0) and jt.times[0] > 0 and jt.times[-1] <= 0.5


def test_jump_times_validation_and_counts():
    with pytest.raises(ValueError):
        JumpTimes(np.array([0.3, 0.2]))
    jt = JumpTimes(np.array([0.25, 0.5]))
    assert list(jt.count(np.array([0.0, 0.25, 0.4, 0.5, 1.0]))) == [0, 1, 1, 2, 2]
    assert list(jt.count(np.array([0.25, 0.5]), left=True)) == [0, 1]


# --- Wiener ------------------------------------------------------------------------

def test_wiener_single_point():
    assert np.array_equal(wiener_on_grid(np.array([0.0]), np.random.default_rng(0)), [0.0])


def test_wiener_rejects_unsorted():
    with pytest.raises(ValueError):
        wiener_on_grid(np.array([0.0, 0.5, 0.4]), np.random.default_rng(0))


def test_wiener_variance_and_independence():
    rng = np.random.default_rng(5)
    w = np.array([wiener_on_grid(np.array([0.0, 0.5, 1.0]), rng) for _ in range(100_000)])
    assert within(w[:, 2] ** 2, 1.0)
    prod = (w[:, 1]) * (w[:, 2] - w[:, 1])
    assert within(prod, 0.0)


def test_levy_construction_law_and_nesting():
    rng = np.random.default_rng(7)
    w = np.array([levy_wiener(2.0, 3, rng) for _ in range(50_000)])
    for k in (1, 4, 8):
        assert within(w[:, k] ** 2, 2.0 * k / 8)
    inc = np.diff(w, axis=1)
    assert within(inc[:, 1] * inc[:, 6], 0.0)
    coarse = levy_wiener(1.0, 2, RngStream(3, 0))
    fine = levy_wiener(1.0, 5, RngStream(3, 0))
    assert np.array_equal(coarse, fine[::8])


def test_path_counts_follow_jump_times():
    lam = IntensityModel.constant(5.0)
    grid = np.linspace(0, 1, 33)
    for r in range(20):
        p = simulate_path(grid, lam, RngStream(1, r))
        assert p.w[0] == 0.0 and p.n[0] == 0
        assert np.array_equal(p.n, p.jumps.count(grid))
        assert p.w.shape == p.n.shape == grid.shape


def test_refined_grid_keeps_noise_on_dyadic_points():
    lam = IntensityModel.constant(4.0)
    coarse = simulate_path(np.linspace(0, 1, 9), lam, RngStream(2, 7), levels=3)
    extra = np.sort(np.concatenate([np.linspace(0, 1, 9), [0.3, 0.61]]))
    fine = simulate_path(extra, lam, RngStream(2, 7), levels=4)
    assert np.array_equal(coarse.jumps.times, fine.jumps.times)
    assert np.array_equal(coarse.w, fine.w[np.searchsorted(extra, np.linspace(0, 1, 9))])


def test_bridge_filled_points_have_right_law():
    lam = IntensityModel.constant(1.0)
    grid = np.array([0.0, 0.1, 0.3, 0.35, 1.0])
    w = np.array([simulate_path(grid, lam, RngStream(4, r), levels=1).w for r in range(40_000)])
    for k in (1, 2, 3):
        assert within(w[:, k] ** 2, grid[k])
    assert within((w[:, 2] - w[:, 1]) * (w[:, 3] - w[:, 2]), 0.0)


def test_path_dump(tmp_path):
    p = GridPath(np.array([0.0, 1.0]), np.array([0.0, 0.5]), np.array([0, 2]),
                 JumpTimes(np.array([0.2, 0.4])), np.array([0.1, 0.2]))
    f = tmp_path / "p.csv"
    dump_path_csv(p, f)
    assert f.read_text().splitlines() == ["t,W,N", "0.0,0.0,0", "1.0,0.5,2"]


# --- iterated integrals ----------------------------------------------------------------

def test_i_ww_examples():
    assert i_ww(1.0, 0.5) == 0.25
    assert i_ww(0.0, 0.3) == -0.15
    with pytest.raises(ValueError):
        i_ww(1.0, 0.0)


def test_i_ww_mean_zero():
    dw = np.random.default_rng(1).normal(0, np.sqrt(0.2), 100_000)
    assert within(i_ww(dw, 0.2), 0.0)


@pytest.mark.parametrize("dn,expected", [(0, 0), (1, 0), (3, 3), (4, 6)])
def test_i_nn_examples(dn, expected):
    assert i_nn(dn) == expected


def test_i_nn_rejects_negative():
    with pytest.raises(ValueError):
        i_nn(-1)


@given(st.integers(0, 60))
def test_i_nn_counts_pairs(k):
    assert i_nn(k) == sum(1 for _ in combinations(range(k), 2))


def test_cross_sum_examples():
    assert cross_sum(0, 1.7) == 0
    assert cross_sum(2, -0.3) == -0.6
    with pytest.raises(ValueError):
        cross_sum(-1, 0.1)


@given(st.lists(st.fractions(), min_size=2, max_size=8))
def test_cross_sum_summation_by_parts(ws):
    # W at t_i, at each jump, and at t: I(N,W) + I(W,N) telescopes to dn * dw
    w0, *wj, wt = ws
    i_wn = sum(wj) - w0 * len(wj)
    i_nw = sum(wt - v for v in wj)
    assert cross_sum(Fraction(len(wj)), wt - w0) == i_wn + i_nw


# --- bridges -------------------------------------------------------------------------

def test_brownian_bridge_mean():
    assert brownian_bridge_mean(0.3, 1.1, 0.2, 0.6, 0.2) == 0.3
    assert brownian_bridge_mean(0.3, 1.1, 0.2, 0.6, 0.6) == 1.1
    assert brownian_bridge_mean(0.0, 2.0, 0.0, 1.0, 0.5) == 1.0
    with pytest.raises(ValueError):
        brownian_bridge_mean(0.0, 2.0, 0.0, 1.0, 1.2)


def test_brownian_bridge_mean_mc():
    # condition on W(1) near 1.0 and average W(0.3)
    rng = np.random.default_rng(8)
    w = np.array([wiener_on_grid(np.array([0.0, 0.3, 1.0]), rng) for _ in range(200_000)])
    sel = np.abs(w[:, 2] - 1.0) < 0.02
    resid = w[sel, 1] - brownian_bridge_mean(0.0, w[sel, 2], 0.0, 1.0, 0.3)
    assert within(resid, 0.0)


def test_poisson_bridge_mean_examples():
    lam = IntensityModel.constant(2.0)
    assert poisson_bridge_mean(0, 4, lam, 0.0, 1.0, 0.25) == 1.0
    assert poisson_bridge_mean(3, 7, lam, 0.2, 0.9, 0.2) == 3.0
    with pytest.raises(ValueError):
        poisson_bridge_mean(3, 2, lam, 0.0, 1.0, 0.5)


def test_poisson_bridge_var_examples():
    lam = IntensityModel.constant(1.0)
    assert poisson_bridge_var(0, 0, lam, 0.0, 1.0, 0.5, conditional=False) == 0.25
    for t in (0.0, 1.0):
        assert poisson_bridge_var(1, 5, lam, 0.0, 1.0, t) == 0.0
        assert poisson_bridge_var(1, 5, lam, 0.0, 1.0, t, conditional=False) == 0.0


def test_poisson_bridge_needs_positive_compensator_increment():
    flat = IntensityModel.from_function(lambda t: 1.0 + 0 * t, 1.0, 1.0, m=lambda t: 0.0 * t)
    with pytest.raises(ContractError):
        poisson_bridge_mean(0, 1, flat, 0.0, 1.0, 0.5)


def test_poisson_bridge_sample_edges():
    lam = IntensityModel.linear(1.0, 1.0, 1.0)
    rng = np.random.default_rng(0)
    assert poisson_bridge_sample(2, 2, lam, 0.0, 1.0, 0.5, rng) == 2
    assert poisson_bridge_sample(2, 9, lam, 0.0, 1.0, 1.0, rng) == 9


def test_poisson_bridge_sample_moments():
    lam = IntensityModel.linear(1.0, 1.0, 1.0)
    rng = np.random.default_rng(4)
    draws = poisson_bridge_sample(np.zeros(100_000, int), np.full(100_000, 6), lam, 0.0, 1.0, 0.5, rng)
    mean = poisson_bridge_mean(0, 6, lam, 0.0, 1.0, 0.5)
    var = poisson_bridge_var(0, 6, lam, 0.0, 1.0, 0.5)
    assert within(draws.astype(float), mean)
    assert within((draws - mean) ** 2, var)
