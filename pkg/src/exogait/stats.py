"""Stride-level mixed model, trial means, and TOST equivalence testing.

The mixed model is y_ij = beta0 + beta1 * cond_j + b_j + eps_ij with one
random intercept b_j per trial, fitted by REML. For a fixed variance ratio
lam = sigma_b^2 / sigma_e^2 the per-trial covariance is compound symmetric,
so everything reduces to per-trial sums via the Sherman-Morrison identity
(I + lam*J)^-1 = I - lam/(1 + n*lam) * J, and REML becomes a 1-D search
over log lam. `lme_oracle` re-derives the same criterion from dense
matrices (explicit H, log-determinants, linear solves) so tests can check
the closed-form path against an independent route.

The REML criterion here drops additive constants that do not depend on
lam; the oracle drops the identical constants, so criterion values are
directly comparable between the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr

from .errors import DidNotConverge, SingularDesign

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_LOG_LAM_LO = -12.0
_LOG_LAM_HI = 12.0


@dataclass(frozen=True)
class StrideObservation:
    """One stride's value for one outcome variable."""

    value: float
    condition: int  # 0 = NoExo, 1 = ExoOff
    trial_id: str

    def __post_init__(self) -> None:
        if self.condition not in (0, 1):
            raise ValueError(f"condition must be 0 or 1, got {self.condition}")


@dataclass
class LmeFit:
    beta0: float
    beta1: float
    sigma_b2: float
    sigma_e2: float
    se_beta1: float
    p_wald: float
    converged: bool
    log_reml: float


@dataclass
class TostResult:
    diff: float
    se_welch: float
    df_welch: float
    t_lower: float
    t_upper: float
    p_lower: float
    p_upper: float
    equivalent: bool
    bound: float
    alpha: float
    degenerate: bool = False


@dataclass(frozen=True)
class StatConfig:
    alpha: float = 0.05
    angle_bound: float = 2.0  # deg
    duration_bound: float = 0.05  # s

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.angle_bound > 0
                and self.duration_bound > 0):
            raise ValueError("StatConfig fields must be positive")


@dataclass
class _TrialSummary:
    condition: int
    n: int = 0
    s: float = 0.0  # sum of values
    ss: float = 0.0  # sum of squares


def _summarize(observations: list[StrideObservation]) -> list[_TrialSummary]:
    by_trial: dict[str, _TrialSummary] = {}
    for obs in observations:
        t = by_trial.get(obs.trial_id)
        if t is None:
            t = by_trial[obs.trial_id] = _TrialSummary(condition=obs.condition)
        elif t.condition != obs.condition:
            raise ValueError(
                f"trial {obs.trial_id!r} appears under both conditions"
            )
        t.n += 1
        t.s += obs.value
        t.ss += obs.value * obs.value
    trials = list(by_trial.values())
    have = {t.condition for t in trials}
    if have != {0, 1}:
        missing = ({0, 1} - have) or {0, 1}
        raise SingularDesign(
            f"condition(s) {sorted(missing)} have no trials; the fixed-effect "
            "design is rank deficient"
        )
    return trials


def _profiled_criterion(trials: list[_TrialSummary], lam: float):
    """REML criterion and GLS quantities at a fixed variance ratio.

    Returns (criterion, beta0, beta1, r_h_r, inv11) where inv11 is the
    (1,1) element of (X' H^-1 X)^-1, the unscaled variance of beta1.
    """
    n = sum(t.n for t in trials)
    a11 = a12 = b0 = b1 = 0.0
    y_h_y = 0.0
    logdet_h = 0.0
    for t in trials:
        w = 1.0 / (1.0 + t.n * lam)
        a11 += t.n * w
        b0 += t.s * w
        if t.condition == 1:
            a12 += t.n * w
            b1 += t.s * w
        y_h_y += t.ss - lam * w * t.s * t.s
        logdet_h += math.log1p(t.n * lam)
    a22 = a12
    det = a11 * a22 - a12 * a12
    if det <= 0:
        raise SingularDesign("GLS normal equations are singular")
    beta1 = (a11 * b1 - a12 * b0) / det
    beta0 = (b0 - a12 * beta1) / a11
    r_h_r = y_h_y - (beta0 * b0 + beta1 * b1)
    r_h_r = max(r_h_r, 0.0)
    scale = max(y_h_y, 1.0)
    if r_h_r <= 1e-14 * scale:
        return math.inf, beta0, beta1, r_h_r, a11 / det
    crit = -0.5 * (logdet_h + math.log(det) + (n - 2) * math.log(r_h_r))
    return crit, beta0, beta1, r_h_r, a11 / det


def _fit_from(trials: list[_TrialSummary], lam: float, converged: bool) -> LmeFit:
    n = sum(t.n for t in trials)
    crit, beta0, beta1, r_h_r, inv11 = _profiled_criterion(trials, lam)
    sigma_e2 = r_h_r / (n - 2)
    sigma_b2 = lam * sigma_e2
    se_beta1 = math.sqrt(sigma_e2 * inv11)
    if se_beta1 > 0:
        p = wald_p(beta1, se_beta1)
    else:
        # Degenerate data (zero residual variance): the Wald limit.
        p = 1.0 if beta1 == 0 else 0.0
    return LmeFit(
        beta0=beta0,
        beta1=beta1,
        sigma_b2=sigma_b2,
        sigma_e2=sigma_e2,
        se_beta1=se_beta1,
        p_wald=p,
        converged=converged,
        log_reml=crit,
    )


def fit_lme(observations: list[StrideObservation]) -> LmeFit:
    """REML fit of the random-intercept model by profiling the ratio.

    A golden-section search maximizes the profiled criterion over natural
    log lam in [-12, 12]; the lam = 0 boundary (no between-trial variance)
    is compared explicitly so the boundary optimum is exact rather than
    approached asymptotically.
    """
    if not observations:
        raise SingularDesign("no observations")
    trials = _summarize(observations)

    def crit(log_lam: float) -> float:
        return _profiled_criterion(trials, math.exp(log_lam))[0]

    lo, hi = _LOG_LAM_LO, _LOG_LAM_HI
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = crit(c), crit(d)
    if math.isinf(fc) or math.isinf(fd):
        # Perfect fit: residuals vanish for every lam; report the boundary.
        return _fit_from(trials, 0.0, converged=True)
    converged = False
    for _ in range(200):
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = crit(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = crit(d)
        if abs(fc - fd) <= 1e-10 * (abs(fc) + abs(fd) + 1.0) and hi - lo < 1e-8:
            converged = True
            break
    if not converged and hi - lo >= 1e-8:
        raise DidNotConverge(
            f"REML search interval still {hi - lo:g} wide after 200 iterations"
        )
    lam = math.exp(0.5 * (lo + hi))
    best_crit = _profiled_criterion(trials, lam)[0]
    crit0 = _profiled_criterion(trials, 0.0)[0]
    if crit0 >= best_crit:
        lam = 0.0
    return _fit_from(trials, lam, converged=True)


def lme_oracle(
    observations: list[StrideObservation], lambda_grid
) -> LmeFit:
    """Exhaustive REML grid evaluation with dense linear algebra.

    Every quantity is recomputed from the explicit n-by-n covariance
    (log-determinants via slogdet, GLS via dense solves), sharing no code
    with the closed-form path. Returns the fit at the best grid point.
    Intended for tests.
    """
    grid = [float(g) for g in lambda_grid]
    if not grid or any(not math.isfinite(g) or g < 0 for g in grid):
        raise ValueError("lambda_grid must be finite and nonnegative")
    if 0.0 not in grid:
        raise ValueError("lambda_grid must include 0")
    if not observations:
        raise SingularDesign("no observations")
    trial_ids: list[str] = []
    cond_of: dict[str, int] = {}
    for obs in observations:
        if obs.trial_id not in cond_of:
            trial_ids.append(obs.trial_id)
            cond_of[obs.trial_id] = obs.condition
        elif cond_of[obs.trial_id] != obs.condition:
            raise ValueError(
                f"trial {obs.trial_id!r} appears under both conditions"
            )
    if {c for c in cond_of.values()} != {0, 1}:
        raise SingularDesign("a condition has no trials")

    y = np.array([o.value for o in observations])
    x = np.column_stack(
        [np.ones(len(observations)),
         np.array([float(o.condition) for o in observations])]
    )
    z = np.zeros((len(observations), len(trial_ids)))
    index = {t: j for j, t in enumerate(trial_ids)}
    for i, obs in enumerate(observations):
        z[i, index[obs.trial_id]] = 1.0
    n = y.size

    best = None
    for lam in grid:
        h = np.eye(n) + lam * (z @ z.T)
        sign, logdet_h = np.linalg.slogdet(h)
        hi_x = np.linalg.solve(h, x)
        hi_y = np.linalg.solve(h, y)
        xtx = x.T @ hi_x
        beta = np.linalg.solve(xtx, x.T @ hi_y)
        r = y - x @ beta
        r_h_r = float(r @ np.linalg.solve(h, r))
        sign_a, logdet_a = np.linalg.slogdet(xtx)
        if sign <= 0 or sign_a <= 0:
            raise SingularDesign("covariance not positive definite on grid")
        if r_h_r <= 1e-14 * max(float(y @ y), 1.0):
            crit = math.inf
        else:
            crit = -0.5 * (logdet_h + logdet_a + (n - 2) * math.log(r_h_r))
        if best is None or crit > best[0]:
            inv11 = float(np.linalg.inv(xtx)[1, 1])
            sigma_e2 = max(r_h_r, 0.0) / (n - 2)
            best = (crit, lam, float(beta[0]), float(beta[1]), sigma_e2, inv11)

    crit, lam, beta0, beta1, sigma_e2, inv11 = best
    se = math.sqrt(sigma_e2 * inv11)
    p = wald_p(beta1, se) if se > 0 else (1.0 if beta1 == 0 else 0.0)
    return LmeFit(
        beta0=beta0,
        beta1=beta1,
        sigma_b2=lam * sigma_e2,
        sigma_e2=sigma_e2,
        se_beta1=se,
        p_wald=p,
        converged=True,
        log_reml=crit,
    )


def trial_means(
    observations: list[StrideObservation],
) -> tuple[list[float], list[float]]:
    """Per-trial stride means, grouped by condition (0 first, then 1).

    Trials keep their first-appearance order within each condition.
    """
    order: list[str] = []
    sums: dict[str, list[float]] = {}
    cond: dict[str, int] = {}
    for obs in observations:
        if obs.trial_id not in sums:
            order.append(obs.trial_id)
            sums[obs.trial_id] = []
            cond[obs.trial_id] = obs.condition
        elif cond[obs.trial_id] != obs.condition:
            raise ValueError(
                f"trial {obs.trial_id!r} appears under both conditions"
            )
        sums[obs.trial_id].append(obs.value)
    means_a = [float(np.mean(sums[t])) for t in order if cond[t] == 0]
    means_b = [float(np.mean(sums[t])) for t in order if cond[t] == 1]
    return means_a, means_b


def _degenerate_p(t_num: float) -> tuple[float, float]:
    """(t, p) limits of a one-sided test as the SE shrinks to zero."""
    if t_num > 0:
        return math.inf, 0.0
    if t_num < 0:
        return -math.inf, 1.0
    return 0.0, 0.5


def tost_welch(
    means_a: list[float],
    means_b: list[float],
    bound: float,
    alpha: float = 0.05,
) -> TostResult:
    """Two one-sided tests for equivalence with a Welch standard error.

    Tests H0: |mean_a - mean_b| >= bound against equivalence. t_upper tests
    the difference against -bound (upper tail), t_lower against +bound
    (lower tail); equivalence requires both p-values below alpha.

    Both sample variances being zero makes the SE degenerate; the result is
    then flagged with p-values taken at their limits rather than raised as
    an error, since equal constant samples are a legitimate (if extreme)
    observation.
    """
    a = np.asarray(means_a, dtype=float)
    b = np.asarray(means_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each group needs >= 2 trial means")
    if not bound > 0:
        raise ValueError(f"bound must be positive, got {bound}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    diff = float(a.mean() - b.mean())
    va = float(a.var(ddof=1)) / a.size
    vb = float(b.var(ddof=1)) / b.size
    se = math.sqrt(va + vb)
    if se == 0.0:
        t_upper, p_upper = _degenerate_p(diff + bound)
        t_lower_num = diff - bound
        if t_lower_num < 0:
            t_lower, p_lower = -math.inf, 0.0
        elif t_lower_num > 0:
            t_lower, p_lower = math.inf, 1.0
        else:
            t_lower, p_lower = 0.0, 0.5
        return TostResult(
            diff=diff,
            se_welch=0.0,
            df_welch=float(a.size + b.size - 2),
            t_lower=t_lower,
            t_upper=t_upper,
            p_lower=p_lower,
            p_upper=p_upper,
            equivalent=p_lower < alpha and p_upper < alpha,
            bound=bound,
            alpha=alpha,
            degenerate=True,
        )
    df = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    t_upper = (diff + bound) / se
    t_lower = (diff - bound) / se
    p_upper = float(stdtr(df, -t_upper))  # upper tail via symmetry
    p_lower = float(stdtr(df, t_lower))
    return TostResult(
        diff=diff,
        se_welch=se,
        df_welch=df,
        t_lower=t_lower,
        t_upper=t_upper,
        p_lower=p_lower,
        p_upper=p_upper,
        equivalent=p_lower < alpha and p_upper < alpha,
        bound=bound,
        alpha=alpha,
        degenerate=False,
    )


def wald_p(beta1: float, se: float) -> float:
    """Two-sided normal-reference p-value for beta1 / se."""
    if not se > 0:
        raise ValueError(f"se must be positive, got {se}")
    z = abs(beta1 / se)
    return math.erfc(z / math.sqrt(2.0))
