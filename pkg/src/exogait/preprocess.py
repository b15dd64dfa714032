"""Gap filling and penalized smoothing for uniformly sampled series.

The smoother solves min_f ||y - f||^2 + lam * P(f) with the discrete
third-difference roughness penalty P(f) = h * sum((d3 f / h^3)^2), the
discrete analogue of the quintic smoothing splines used on marker data.
Instead of picking lam by cross-validation, lam is bisected until the
residual mean squared error hits a prescribed target, which is how a fixed
"mean square error" setting behaves in standard gait software.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solveh_banded

from .errors import NonUniformSampling, SeriesTooShort, TooFewValidFrames
from .trial import MarkerTrajectory

LAMBDA_LO = 1e-12
LAMBDA_HI = 1e12


@dataclass(frozen=True)
class SmoothingSpec:
    """Residual-MSE target for the smoother.

    target_mse is in squared data units (mm^2 for marker coordinates) and
    mse_tolerance is relative: achieved MSE within
    target_mse * (1 +/- mse_tolerance) counts as met.
    """

    target_mse: float = 10.0
    max_iterations: int = 200
    mse_tolerance: float = 0.05

    def __post_init__(self) -> None:
        if not self.target_mse > 0:
            raise ValueError(f"target_mse must be > 0, got {self.target_mse}")
        if not 0 < self.mse_tolerance < 1:
            raise ValueError(
                f"mse_tolerance must be in (0, 1), got {self.mse_tolerance}"
            )
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class GapFillSpec:
    max_gap: int = 10
    method: str = "cubic-spline"

    def __post_init__(self) -> None:
        if self.max_gap < 1:
            raise ValueError(f"max_gap must be >= 1, got {self.max_gap}")
        if self.method != "cubic-spline":
            raise ValueError(f"unknown gap-fill method {self.method!r}")


def fill_gaps(series: MarkerTrajectory, spec: GapFillSpec) -> MarkerTrajectory:
    """Fill interior gaps of up to max_gap frames by cubic interpolation.

    The spline passes through every valid sample of the trajectory, so valid
    frames are returned bit-identical; only interior gap frames of admissible
    length get new coordinates. Leading and trailing gaps stay invalid (no
    extrapolation), as do interior gaps longer than max_gap.
    """
    valid_idx = np.flatnonzero(series.valid)
    if valid_idx.size < 4:
        raise TooFewValidFrames(
            f"{valid_idx.size} valid frames in {series.label!r}; "
            "need at least 4 to anchor a cubic spline"
        )
    coords = series.coords.copy()
    valid = series.valid.copy()
    spline = CubicSpline(valid_idx, series.coords[valid_idx, :], axis=0)
    for a, b in zip(valid_idx[:-1], valid_idx[1:]):
        gap = b - a - 1
        if 0 < gap <= spec.max_gap:
            idx = np.arange(a + 1, b)
            coords[idx, :] = spline(idx)
            valid[idx] = True
    residuals = None
    if series.residuals is not None:
        residuals = series.residuals.copy()
    return MarkerTrajectory(
        label=series.label, coords=coords, valid=valid, residuals=residuals
    )


# Autocorrelation of the third-difference stencil [-1, 3, -3, 1]: the
# diagonals of D3 D3^T, which is exactly Toeplitz (rows of D3 never clip).
_D3_STENCIL = np.array([-1.0, 3.0, -3.0, 1.0])
_D3_AUTOCORR = np.convolve(_D3_STENCIL, _D3_STENCIL[::-1])


def smooth_with_lambda(
    samples: np.ndarray, rate: float, lam: float
) -> np.ndarray:
    """Solve the penalized least-squares system for a fixed lambda.

    Uses the dual (Reinsch) form: with z solving
    (I + c D3 D3^T) z = D3 y, the minimizer is f = y - c D3^T z. Unlike the
    primal system I + c D3^T D3, the dual matrix stays well conditioned as
    c grows (D3 D3^T has no null space), so very stiff settings converge to
    the least-squares quadratic instead of losing the identity term to
    roundoff. One iterative-refinement pass tightens the solve.
    """
    y = np.asarray(samples, dtype=float)
    n = y.size
    h = 1.0 / rate
    c = lam * h**-5
    if n < 4 or c == 0.0:
        return y.copy()
    d3y = np.diff(y, n=3)
    m = n - 3
    ab = np.zeros((4, m))
    ab[3] = 1.0 + c * 20.0
    ab[2, 1:] = c * -15.0
    ab[1, 2:] = c * 6.0
    ab[0, 3:] = c * -1.0
    try:
        z = solveh_banded(ab, d3y, lower=False)
        residual = d3y - (z + c * np.convolve(z, _D3_AUTOCORR, mode="same"))
        z = z + solveh_banded(ab, residual, lower=False)
    except np.linalg.LinAlgError:
        return _quadratic_limit(y)
    return y - c * np.convolve(z, _D3_STENCIL, mode="full")


def _quadratic_limit(y: np.ndarray) -> np.ndarray:
    """Least-squares quadratic through the series (penalty null space)."""
    n = y.size
    t = np.arange(n, dtype=float)
    t = (t - t.mean()) / max(t.max() - t.mean(), 1.0)
    v = np.column_stack([np.ones(n), t, t * t])
    coef, *_ = np.linalg.lstsq(v, y, rcond=None)
    return v @ coef


def roughness(samples: np.ndarray, rate: float) -> float:
    """The penalty value P(f) = h * sum((d3 f / h^3)^2)."""
    y = np.asarray(samples, dtype=float)
    if y.size < 4:
        return 0.0
    h = 1.0 / rate
    d3 = np.diff(y, n=3)
    return float(h**-5 * np.sum(d3 * d3))


def _check_series(samples, rate, times) -> np.ndarray:
    y = np.asarray(samples, dtype=float)
    if y.ndim != 1:
        raise ValueError("samples must be 1-D")
    if y.size < 7:
        raise SeriesTooShort(f"{y.size} samples; smoothing needs >= 7")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values; fill gaps first")
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    if times is not None:
        t = np.asarray(times, dtype=float)
        if t.shape != y.shape:
            raise ValueError("times must match samples in length")
        dt = np.diff(t)
        if dt.size and (np.any(dt <= 0) or np.ptp(dt) > 1e-6 * abs(dt[0])):
            raise NonUniformSampling("sample times are not uniformly spaced")
        if dt.size and abs(dt[0] * rate - 1.0) > 1e-6:
            raise NonUniformSampling(
                f"times imply rate {1.0 / dt[0]:g}, got {rate:g}"
            )
    return y


def smooth_to_mse(
    samples: np.ndarray,
    rate: float,
    spec: SmoothingSpec,
    times: np.ndarray | None = None,
) -> tuple[np.ndarray, float, bool]:
    """Smooth a series so its residual MSE hits spec.target_mse.

    Returns (smoothed, achieved_mse, met_target). Residual MSE grows
    monotonically with lambda, so a bisection on log lambda over
    [1e-12, 1e12] brackets the target whenever it is reachable. When even
    the lambda -> infinity limit (the least-squares quadratic) leaves the
    residual below target, that limit is returned with met_target False.
    """
    y = _check_series(samples, rate, times)
    target = spec.target_mse
    tol = spec.mse_tolerance * target

    def mse_of(f: np.ndarray) -> float:
        r = y - f
        return float(np.mean(r * r))

    f_quad = _quadratic_limit(y)
    mse_quad = mse_of(f_quad)
    if mse_quad <= target + tol:
        # Even infinite stiffness cannot push the residual above the target;
        # report the limit itself.
        return f_quad, mse_quad, abs(mse_quad - target) <= tol

    lo, hi = LAMBDA_LO, LAMBDA_HI
    f_lo = smooth_with_lambda(y, rate, lo)
    mse_lo = mse_of(f_lo)
    if mse_lo >= target:
        return f_lo, mse_lo, abs(mse_lo - target) <= tol
    f_hi = smooth_with_lambda(y, rate, hi)
    mse_hi = mse_of(f_hi)
    if mse_hi <= target:
        return f_hi, mse_hi, abs(mse_hi - target) <= tol

    f_mid, mse_mid = f_lo, mse_lo
    for _ in range(spec.max_iterations):
        mid = np.sqrt(lo * hi)
        f_mid = smooth_with_lambda(y, rate, mid)
        mse_mid = mse_of(f_mid)
        if abs(mse_mid - target) <= tol:
            return f_mid, mse_mid, True
        if mse_mid < target:
            lo = mid
        else:
            hi = mid
    return f_mid, mse_mid, False
