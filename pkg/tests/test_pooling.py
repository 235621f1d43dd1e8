"""
Module: tests/test_pooling.py
Description: Unit and property tests for pooling grids and operators.
"""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from pooling.grid import MaxfunConfig, make_grid, make_grid_1d, subsquare
from pooling.naive import (
    naive_avg,
    naive_max,
    naive_maxfun,
    naive_maxfun_1d,
    naive_mixed,
    naive_stochastic,
)
from pooling.operators import (
    maxfun_profile,
    pool_avg,
    pool_max,
    pool_maxfun,
    pool_maxfun_1d,
    pool_mixed,
    pool_stochastic,
    reduce_profile,
)
from utils.errors import ValidationError


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def _single(X):
    X = np.asarray(X, dtype=float)
    return make_grid(X.shape[0], X.shape[1], X.shape[0], X.shape[0])


# --- grid ---------------------------------------------------------------


def test_partition_grid():
    g = make_grid(6, 6, 3, 3)
    assert g.out_shape == (2, 2)
    assert g.disjoint
    assert g.index_set(1, 1)[0] == (3, 3)
    assert len(set(g.index_set(0, 0)) & set(g.index_set(1, 1))) == 0


def test_single_window_grid():
    g = make_grid(5, 5, 5, 5)
    assert g.out_shape == (1, 1)


def test_overlap_grid_count():
    g = make_grid(128, 128, 21, 11)
    assert g.out_shape == (10, 10)
    assert not g.disjoint


@pytest.mark.parametrize("args, code", [((4, 4, 5, 1), "WINDOW_EXCEEDS_INPUT"), ((4, 4, 2, 0), "BAD_STRIDE")])
def test_grid_errors(args, code):
    with pytest.raises(ValidationError, match=code):
        make_grid(*args)


def test_subsquare_examples():
    assert subsquare((2, 2), 0) == ((2, 2),)
    assert set(subsquare((2, 2), 1)) == {(i, j) for i in (1, 2, 3) for j in (1, 2, 3)}
    assert len(subsquare((3, 3), 2)) == 25
    with pytest.raises(ValidationError):
        subsquare((0, 3), 1)


def test_maxfun_config_checks():
    with pytest.raises(ValidationError, match="EVEN_WINDOW_CENTERED"):
        MaxfunConfig(r_min=1, b=1, centered=True).validate_for_window(4)
    with pytest.raises(ValidationError, match="RADIUS_EXCEEDS_WINDOW"):
        MaxfunConfig(r_min=1, b=2, centered=False).validate_for_window(4)
    MaxfunConfig(r_min=1, b=1, centered=False).validate_for_window(4)
    with pytest.raises(ValidationError):
        MaxfunConfig(r_min=2, b=1)


# --- worked examples ----------------------------------------------------


def test_avg_max_mixed_on_single_window():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    g = _single(X)
    assert pool_avg(X, g).values[0, 0] == 2.5
    assert pool_max(X, g).values[0, 0] == 4.0
    assert pool_mixed(X, g, 0.5).values[0, 0] == 3.25


def test_constant_image_every_operator():
    X = np.full((9, 9), 0.7)
    g = make_grid(9, 9, 3, 3)
    assert np.allclose(pool_avg(X, g).values, 0.7, atol=1e-15)
    assert np.all(pool_max(X, g).values == 0.7)
    assert np.allclose(pool_stochastic(X, g).values, 0.7, atol=1e-15)
    assert np.allclose(pool_maxfun(X, g, MaxfunConfig(r_min=1, b=1)).values, 0.7, atol=1e-15)


def test_stochastic_examples():
    X = np.array([[1.0, 2.0], [3.0, 0.0]])
    assert pool_stochastic(X, _single(X)).values[0, 0] == pytest.approx(7.0 / 3.0, abs=1e-15)
    Z = np.zeros((2, 2))
    assert pool_stochastic(Z, _single(Z)).values[0, 0] == 0.0


def test_mixed_endpoints_are_exact():
    X = np.random.default_rng(0).random((12, 12))
    g = make_grid(12, 12, 4, 2)
    assert np.array_equal(pool_mixed(X, g, 1.0).values, pool_max(X, g).values)
    assert np.array_equal(pool_mixed(X, g, 0.0).values, pool_avg(X, g).values)
    with pytest.raises(ValidationError, match="ALPHA_OUT_OF_RANGE"):
        pool_mixed(X, g, 1.5)


def test_maxfun_bright_core():
    X = np.zeros((5, 5))
    X[1:4, 1:4] = 9.0
    out = pool_maxfun(X, _single(X), MaxfunConfig(r_min=1, b=2, centered=True))
    assert out.values[0, 0] == 9.0
    assert out.provenance.radius[0, 0] == 1


def test_maxfun_single_spike_is_below_max():
    X = np.zeros((5, 5))
    X[2, 2] = 25.0
    g = _single(X)
    out = pool_maxfun(X, g, MaxfunConfig(r_min=1, b=2, centered=True))
    assert out.values[0, 0] == pytest.approx(25.0 / 9.0, abs=1e-14)
    assert pool_max(X, g).values[0, 0] == 25.0


def test_noncentered_provenance_prefers_first_center():
    X = np.zeros((7, 7))
    X[1, 5] = 9.0
    out = pool_maxfun(X, _single(X), MaxfunConfig(r_min=1, b=1, centered=False))
    assert out.values[0, 0] == 1.0
    assert (out.provenance.center_row[0, 0], out.provenance.center_col[0, 0]) == (1, 4)


def test_negative_input_rejected():
    X = -np.ones((3, 3))
    with pytest.raises(ValidationError, match="NEGATIVE_INPUT"):
        pool_avg(X, _single(X))


def test_maxfun_1d_examples():
    g1 = make_grid_1d(5, 5, 5)
    cfg = MaxfunConfig(r_min=1, b=2, centered=True)
    out = pool_maxfun_1d(np.array([0.0, 0.0, 5.0, 0.0, 0.0]), g1, cfg)
    assert out.values[0] == pytest.approx(5.0 / 3.0, abs=1e-15)
    assert out.provenance.center_row[0] == 2
    const = pool_maxfun_1d(np.full((10, 2), 3.0), make_grid_1d(10, 5, 5), cfg)
    assert np.allclose(const.values, 3.0, atol=1e-15)


# --- oracle equivalence -------------------------------------------------


@pytest.mark.parametrize("window, stride", [(3, 3), (3, 1), (4, 2), (5, 5), (5, 3)])
def test_operators_match_naive_loops(rng, window, stride):
    X = rng.random((17, 14))
    X[rng.random(X.shape) < 0.3] = 0.0
    g = make_grid(17, 14, window, stride)
    assert np.array_equal(pool_avg(X, g).values, naive_avg(X, window, stride))
    assert np.array_equal(pool_max(X, g).values, naive_max(X, window, stride))
    assert np.array_equal(pool_mixed(X, g, 0.37).values, naive_mixed(X, window, stride, 0.37))
    assert np.array_equal(pool_stochastic(X, g).values, naive_stochastic(X, window, stride))
    b = (window - 1) // 2
    free = MaxfunConfig(r_min=1, b=b, centered=False)
    assert np.array_equal(pool_maxfun(X, g, free).values, naive_maxfun(X, window, stride, 1, b, False))
    if window % 2:
        cfg = MaxfunConfig(r_min=1, b=b, centered=True)
        assert np.array_equal(pool_maxfun(X, g, cfg).values, naive_maxfun(X, window, stride, 1, b, True))


@pytest.mark.parametrize("stride", [5, 2])
@pytest.mark.parametrize("centered", [True, False])
def test_maxfun_1d_matches_naive(rng, stride, centered):
    x = rng.random((45, 3))
    g1 = make_grid_1d(45, 5, stride)
    cfg = MaxfunConfig(r_min=1, b=2, centered=centered)
    assert np.array_equal(pool_maxfun_1d(x, g1, cfg).values, naive_maxfun_1d(x, 5, stride, 1, 2, centered))


def test_channel_stack_equals_per_channel(rng):
    stack = rng.random((3, 10, 10))
    g = make_grid(10, 10, 5, 5)
    cfg = MaxfunConfig(r_min=1, b=2, centered=False)
    pooled = pool_maxfun(stack, g, cfg).values
    for c in range(3):
        assert np.array_equal(pooled[c], pool_maxfun(stack[c], g, cfg).values)


def test_profile_reduction_matches_direct_pooling(rng):
    X = rng.random((21, 21))
    g = make_grid(21, 21, 7, 7)
    for centered in (True, False):
        profile = maxfun_profile(X, g, b=3, centered=centered)
        for r_min in (1, 2, 3):
            direct = pool_maxfun(X, g, MaxfunConfig(r_min=r_min, b=3, centered=centered))
            reduced = reduce_profile(profile, r_min)
            assert np.array_equal(reduced.values, direct.values)
            assert np.array_equal(reduced.provenance.radius, direct.provenance.radius)


# --- properties ---------------------------------------------------------


def test_degenerate_radius_equals_average(rng):
    for _ in range(10):
        X = rng.random((15, 15))
        g = make_grid(15, 15, 5, 5)
        avg = pool_avg(X, g).values
        for centered in (True, False):
            assert np.array_equal(pool_maxfun(X, g, MaxfunConfig(r_min=2, b=2, centered=centered)).values, avg)


def test_sandwich(rng):
    X = rng.random((50, 21, 21))
    g = make_grid(21, 21, 7, 7)
    avg, mx = pool_avg(X, g).values, pool_max(X, g).values
    mf = pool_maxfun(X, g, MaxfunConfig(r_min=1, b=3)).values
    assert np.all(avg <= mf + 1e-12)
    assert np.all(mf <= mx + 1e-12)


def test_nonexpansive_disjoint_windows(rng):
    X = rng.random((500, 15, 15))
    Y = rng.random((500, 15, 15))
    g = make_grid(15, 15, 5, 5)
    cfg = MaxfunConfig(r_min=1, b=2)
    diff_out = np.sqrt(((pool_maxfun(X, g, cfg).values - pool_maxfun(Y, g, cfg).values) ** 2).sum(axis=(1, 2)))
    diff_in = np.sqrt(((X - Y) ** 2).sum(axis=(1, 2)))
    assert np.all(diff_out <= diff_in + 1e-12)


def test_reduce_profile_rejects_radius_below_one(rng):
    X = rng.random((9, 9))
    profile = maxfun_profile(X, make_grid(9, 9, 9, 9), b=2, centered=False)
    for bad in (0, -1):
        with pytest.raises(ValidationError, match="BAD_RADIUS"):
            reduce_profile(profile, bad)


def test_stochastic_sandwich(rng):
    """Test avg <= stochastic <= max on random nonnegative inputs."""
    for window, stride in ((4, 4), (4, 2), (3, 1)):
        X = rng.random((200, 16, 16))
        X[:20] = 0.0
        X[20:40, :8] = 0.0
        g = make_grid(16, 16, window, stride)
        avg, mx = pool_avg(X, g).values, pool_max(X, g).values
        st = pool_stochastic(X, g).values
        assert np.all(avg <= st + 1e-12)
        assert np.all(st <= mx + 1e-12)


def test_mixed_sandwich(rng):
    X = rng.random((200, 16, 16))
    g = make_grid(16, 16, 4, 2)
    avg, mx = pool_avg(X, g).values, pool_max(X, g).values
    for alpha in [0.0, 0.3, 0.7, 1.0, *rng.random(4)]:
        mixed = pool_mixed(X, g, float(alpha)).values
        assert np.all(avg <= mixed + 1e-12)
        assert np.all(mixed <= mx + 1e-12)


def test_stochastic_is_not_monotone():
    """Raising an entry can lower the stochastic pool, so it stays out of the monotonicity suite."""
    X = np.array([[2.0, 0.0], [0.0, 0.0]])
    Y = np.array([[2.0, 1.0], [0.0, 0.0]])
    assert np.all(X <= Y)
    low = pool_stochastic(X, _single(X)).values[0, 0]
    high = pool_stochastic(Y, _single(Y)).values[0, 0]
    assert low == 2.0
    assert high == pytest.approx(5.0 / 3.0, abs=1e-15)
    assert low > high
