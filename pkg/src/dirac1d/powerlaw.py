"""Weighted nonlinear least squares for the decay law W(s) = (a s + b)^-nu.

Damped Gauss-Newton (Levenberg-style lambda adaptation) with the
analytic Jacobian

    df/da = -nu s (a s + b)^(-nu-1)
    df/db = -nu   (a s + b)^(-nu-1)
    df/dnu = -ln(a s + b) (a s + b)^(-nu)

multi-started over nu in {0.5, 0.75, 1.0}; for each start, (a, b) come
from a two-point solve of w^(-1/nu) = a s + b through the first and
last weighted points.  The winner is the converged start with the
lowest weighted sum of squared residuals, ties broken by lower nu.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateDataError, FitConvergenceError

NU_STARTS = (0.5, 0.75, 1.0)
STEP_TOL = 1e-10
MAX_ITER = 200
LAMBDA0 = 1e-3
LAMBDA_MAX = 1e12


@dataclass
class FitResult:
    a: float
    b: float
    nu: float
    r_squared: float
    residuals: np.ndarray  # raw w_i - f(s_i)
    converged: bool
    iterations: int
    sse: float  # weighted sum of squared residuals


def power_law(s, a: float, b: float, nu: float):
    """W(s) = (a s + b)^-nu; requires a s + b > 0 on the evaluation points."""
    base = a * np.asarray(s, dtype=float) + b
    if np.any(base <= 0):
        raise ConfigError(f"a*s + b must stay positive (a={a}, b={b})")
    return base**-nu


def _jacobian(s, a, b, nu):
    base = a * s + b
    powm1 = base ** (-nu - 1.0)
    return np.column_stack((-nu * s * powm1, -nu * powm1, -np.log(base) * base**-nu))


def _two_point_init(s, w, nu0):
    u = w ** (-1.0 / nu0)
    a0 = (u[-1] - u[0]) / (s[-1] - s[0])
    b0 = u[0] - a0 * s[0]
    if b0 <= 0:
        b0 = max(u[0], 1e-6)
    return a0, b0


def _minimize(s, w, wt, theta0):
    """Damped Gauss-Newton from one start; returns (theta, sse, converged, iters)."""

    def sse_of(theta):
        a, b, nu = theta
        base = a * s + b
        if np.any(base <= 0) or nu <= 0:
            return None, np.inf
        r = w - base**-nu
        return r, float(np.sum(wt * r * r))

    theta = np.asarray(theta0, dtype=float)
    r, sse = sse_of(theta)
    if r is None:
        return theta, np.inf, False, 0
    lam = LAMBDA0
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        jac = _jacobian(s, *theta)
        jtw = jac.T * wt
        gram = jtw @ jac
        grad = jtw @ r
        stepped = False
        while lam <= LAMBDA_MAX:
            damped = gram + lam * np.diag(np.diag(gram))
            try:
                delta = np.linalg.solve(damped, grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = theta + delta
            r_trial, sse_trial = sse_of(trial)
            if sse_trial < sse:
                theta, r, sse = trial, r_trial, sse_trial
                lam = max(lam / 10.0, 1e-15)
                stepped = True
                if np.linalg.norm(delta) < STEP_TOL * (np.linalg.norm(theta) + STEP_TOL):
                    converged = True
                break
            lam *= 10.0
        if converged:
            break
        if not stepped:
            # No damped step reduces the residual: either a stationary
            # point (perfect fit at round-off floor) or a genuine stall.
            converged = _stationary(grad, gram, sse)
            break
    return theta, sse, converged, it


def _stationary(grad, gram, sse):
    """Accept a stalled iterate whose gradient is negligible."""
    scale = max(np.max(np.abs(np.diag(gram))), 1.0)
    return float(np.linalg.norm(grad)) <= 1e-12 * scale * max(np.sqrt(sse), 1.0)


def r_squared(w, w_fit, weights=None) -> float:
    """1 - SS_res / SS_tot with weighted sums about the weighted mean."""
    w = np.asarray(w, dtype=float)
    w_fit = np.asarray(w_fit, dtype=float)
    if w.shape != w_fit.shape:
        raise ConfigError("data and fit arrays must share a shape")
    wt = np.ones_like(w) if weights is None else np.asarray(weights, dtype=float)
    mean = np.sum(wt * w) / np.sum(wt)
    ss_tot = float(np.sum(wt * (w - mean) ** 2))
    if ss_tot == 0.0:
        raise DegenerateDataError("zero-variance data; R^2 undefined")
    ss_res = float(np.sum(wt * (w - w_fit) ** 2))
    return 1.0 - ss_res / ss_tot


def fit_power_law(s, w, weights=None) -> FitResult:
    """Fit W(s) = (a s + b)^-nu to weighted data."""
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    if s.shape != w.shape or s.ndim != 1:
        raise ConfigError("s and w must be 1-d arrays of equal length")
    if s.size < 4:
        raise ConfigError(f"need at least 4 points, got {s.size}")
    if np.any(w <= 0):
        raise ConfigError("widths must be positive")
    wt = np.ones_like(w) if weights is None else np.asarray(weights, dtype=float)
    if wt.shape != w.shape or np.any(wt < 0):
        raise ConfigError("weights must be nonnegative, one per point")
    if np.count_nonzero(wt) < 4:
        raise ConfigError("need at least 4 points with positive weight")
    live = wt > 0
    if np.ptp(w[live]) == 0.0:
        raise DegenerateDataError("constant widths carry no decay to fit")
    if np.ptp(s[live]) == 0.0:
        raise DegenerateDataError("all strengths equal; slope unidentifiable")

    candidates = []
    for nu0 in NU_STARTS:
        a0, b0 = _two_point_init(s, w, nu0)
        theta, sse, converged, iters = _minimize(s, w, wt, (a0, b0, nu0))
        if converged and np.isfinite(sse) and theta[2] > 0 and theta[1] > 0:
            candidates.append((sse, theta[2], theta, iters))
    if not candidates:
        raise FitConvergenceError(
            f"no start in nu={NU_STARTS} converged on {s.size} points"
        )
    candidates.sort(key=lambda c: (c[0], c[1]))
    sse, _, theta, iters = candidates[0]
    a, b, nu = (float(v) for v in theta)
    fit = power_law(s, a, b, nu)
    return FitResult(
        a=a,
        b=b,
        nu=nu,
        r_squared=r_squared(w, fit, wt),
        residuals=w - fit,
        converged=True,
        iterations=iters,
        sse=sse,
    )


def weights_from_ensemble(w_std, n_samples: int) -> np.ndarray:
    """sigma^-2 weights from ensemble spread, sigma = w_std / sqrt(n).

    Zero-spread points (strength 0: all samples identical) would get
    infinite weight; they are capped at 10x the largest finite weight.
    """
    w_std = np.asarray(w_std, dtype=float)
    if n_samples < 1:
        raise ConfigError(f"n_samples must be positive, got {n_samples}")
    sigma = w_std / np.sqrt(n_samples)
    out = np.empty_like(sigma)
    finite = sigma > 0
    out[finite] = sigma[finite] ** -2
    if np.any(finite):
        out[~finite] = 10.0 * np.max(out[finite])
    else:
        out[:] = 1.0
    return out
