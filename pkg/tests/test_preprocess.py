"""Tests for gap filling and residual-MSE-targeted smoothing."""

import numpy as np
import pytest

from exogait.errors import NonUniformSampling, SeriesTooShort, TooFewValidFrames
from exogait.preprocess import (
    GapFillSpec,
    SmoothingSpec,
    fill_gaps,
    roughness,
    smooth_to_mse,
    smooth_with_lambda,
)
from exogait.trial import MarkerTrajectory


def _traj(coords, valid):
    coords = np.asarray(coords, dtype=float)
    return MarkerTrajectory(label="HEE", coords=coords, valid=np.asarray(valid))


def _noisy_sine(seed=0, rate=100.0, duration=5.0, amplitude=50.0, noise_sd=None):
    # Variance sigma^2 = 10 so the target-10 smoother has headroom.
    if noise_sd is None:
        noise_sd = np.sqrt(10.0)
    rng = np.random.default_rng(seed)
    t = np.arange(int(duration * rate)) / rate
    return amplitude * np.sin(2.0 * np.pi * 1.0 * t) + rng.normal(0.0, noise_sd, t.size)


def test_constant_series_cannot_reach_target():
    y = np.full(100, 3.0)
    smoothed, mse, met = smooth_to_mse(y, 100.0, SmoothingSpec())
    np.testing.assert_allclose(smoothed, y, atol=1e-9)
    assert mse == pytest.approx(0.0, abs=1e-18)
    assert not met


def test_quadratic_is_penalty_null_space():
    # A quadratic has zero third difference, so any lambda reproduces it.
    t = np.arange(50, dtype=float)
    y = 0.3 * t * t - 2.0 * t + 7.0
    for lam in [1e-6, 1.0, 1e6]:
        smoothed = smooth_with_lambda(y, 100.0, lam)
        np.testing.assert_allclose(smoothed, y, atol=1e-6)
    assert roughness(y, 100.0) == pytest.approx(0.0, abs=1e-12)


def test_noisy_sine_hits_target():
    y = _noisy_sine(seed=1)
    smoothed, mse, met = smooth_to_mse(y, 100.0, SmoothingSpec(target_mse=10.0))
    assert met
    assert 9.5 <= mse <= 10.5
    assert roughness(smoothed, 100.0) < roughness(y, 100.0)


def test_mse_monotone_in_lambda():
    # Slack of 1e-5*(1+MSE) absorbs solver roundoff on the stiff plateau,
    # where adjacent exact values differ by less than the solve error.
    rng = np.random.default_rng(8)
    for _ in range(10):
        y = rng.normal(0.0, 5.0, 200) + np.linspace(0.0, 30.0, 200)
        grid = np.geomspace(1e-9, 1e9, 20)
        mses = []
        for lam in grid:
            f = smooth_with_lambda(y, 100.0, lam)
            mses.append(float(np.mean((y - f) ** 2)))
        assert all(b >= a - 1e-5 * (1.0 + a) for a, b in zip(mses, mses[1:]))


def test_smoothing_reduces_roughness():
    rng = np.random.default_rng(21)
    for _ in range(10):
        y = rng.normal(0.0, 2.0, 150)
        for lam in [1e-4, 1e-1, 1e2]:
            f = smooth_with_lambda(y, 100.0, lam)
            assert roughness(f, 100.0) <= roughness(y, 100.0) + 1e-9


def test_solver_deterministic():
    y = _noisy_sine(seed=3)
    a = smooth_with_lambda(y, 100.0, 0.37)
    b = smooth_with_lambda(y.copy(), 100.0, 0.37)
    assert np.array_equal(a, b)


def test_target_scaling():
    y = _noisy_sine(seed=4, noise_sd=5.0)
    _, mse, met = smooth_to_mse(y, 100.0, SmoothingSpec(target_mse=4.0))
    assert met
    assert abs(mse - 4.0) <= 0.2


def test_non_uniform_times_rejected():
    y = np.zeros(20)
    t = np.arange(20) / 100.0
    t[10] += 0.002
    with pytest.raises(NonUniformSampling):
        smooth_to_mse(y, 100.0, SmoothingSpec(), times=t)
    with pytest.raises(NonUniformSampling):
        # Uniform but implying a different rate than declared.
        smooth_to_mse(y, 50.0, SmoothingSpec(), times=np.arange(20) / 100.0)


def test_short_series_rejected():
    with pytest.raises(SeriesTooShort):
        smooth_to_mse(np.zeros(6), 100.0, SmoothingSpec())


def test_non_finite_rejected():
    y = np.zeros(20)
    y[3] = np.nan
    with pytest.raises(ValueError):
        smooth_to_mse(y, 100.0, SmoothingSpec())


def test_spec_validation():
    with pytest.raises(ValueError):
        SmoothingSpec(target_mse=0.0)
    with pytest.raises(ValueError):
        SmoothingSpec(mse_tolerance=0.0)
    with pytest.raises(ValueError):
        GapFillSpec(max_gap=0)
    with pytest.raises(ValueError):
        GapFillSpec(method="linear")


def test_fill_linear_ramp_gap_exactly():
    # A straight line is inside the cubic space, so the gap frames are exact.
    n = 20
    coords = np.column_stack([np.arange(n, dtype=float)] * 3)
    valid = np.ones(n, dtype=bool)
    valid[7:10] = False
    broken = coords.copy()
    broken[7:10] = 0.0
    filled = fill_gaps(_traj(broken, valid), GapFillSpec())
    assert filled.valid.all()
    np.testing.assert_allclose(filled.coords, coords, atol=1e-9)


def test_fill_preserves_valid_frames_bit_identical():
    rng = np.random.default_rng(12)
    coords = rng.normal(0.0, 100.0, (40, 3))
    valid = np.ones(40, dtype=bool)
    valid[15:18] = False
    traj = _traj(coords, valid)
    filled = fill_gaps(traj, GapFillSpec())
    assert np.array_equal(filled.coords[valid], coords[valid])


def test_fill_skips_long_gap():
    coords = np.column_stack([np.arange(30, dtype=float)] * 3)
    valid = np.ones(30, dtype=bool)
    valid[8:20] = False  # 12-frame gap
    filled = fill_gaps(_traj(coords, valid), GapFillSpec(max_gap=10))
    assert not filled.valid[8:20].any()
    assert filled.valid[:8].all() and filled.valid[20:].all()


def test_fill_leaves_leading_and_trailing_gaps():
    coords = np.zeros((15, 3))
    valid = np.ones(15, dtype=bool)
    valid[:3] = False
    valid[-2:] = False
    filled = fill_gaps(_traj(coords, valid), GapFillSpec())
    assert not filled.valid[:3].any()
    assert not filled.valid[-2:].any()


def test_fill_needs_four_valid_frames():
    coords = np.zeros((10, 3))
    valid = np.zeros(10, dtype=bool)
    valid[[0, 4, 9]] = True
    with pytest.raises(TooFewValidFrames):
        fill_gaps(_traj(coords, valid), GapFillSpec())
