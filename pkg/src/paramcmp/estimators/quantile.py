"""Linear quantile regression and its case-resampling bootstrap.

The check-loss problem is solved as a linear program whose optimum is a
basic solution: p observations are interpolated exactly. After the solver
returns, the basis is recovered from the zero residuals and the coefficients
are re-solved from those p rows, so they carry no solver tolerance.
"""

from __future__ import annotations

import logging
from statistics import NormalDist

import numpy as np
import scipy.linalg
from scipy.optimize import linprog

from ..data import ModelFrame
from ..errors import BootstrapError, CollinearityError, DegenerateFitError, EstimationError
from ..numerics import replicate_rng, solve_least_squares
from .base import EstimatorSpec, FitResult

log = logging.getLogger(__name__)

_STD_NORMAL = NormalDist()


def check_loss(resid: np.ndarray, q: float) -> float:
    """Sum of the asymmetric absolute loss rho_q over residuals."""
    return float(np.sum(np.where(resid >= 0, q * resid, (q - 1.0) * resid)))


def solve_rq(X: np.ndarray, y: np.ndarray, q: float, names=None) -> np.ndarray:
    """Coefficients minimizing ``sum rho_q(y - X b)``; an exact basic solution."""
    if not 0.0 < q < 1.0:
        raise EstimationError(f"quantile must lie in (0, 1), got {q}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    # rank check; also supplies a good collinearity message
    solve_least_squares(X, y, names)

    # min q*1'u + (1-q)*1'v  s.t.  X b + u - v = y,  u, v >= 0
    c = np.concatenate([np.zeros(p), np.full(n, q), np.full(n, 1.0 - q)])
    eye = np.eye(n)
    A_eq = np.hstack([X, eye, -eye])
    bounds = [(None, None)] * p + [(0.0, None)] * (2 * n)
    res = linprog(c, A_eq=A_eq, b_eq=y, bounds=bounds, method="highs-ds")
    if res.status != 0:
        raise DegenerateFitError(f"quantile LP failed: {res.message}")
    beta = res.x[:p]
    return _polish_basis(X, y, q, beta)


def _polish_basis(X, y, q, beta):
    resid = y - X @ beta
    scale = 1.0 + np.max(np.abs(y))
    order = np.argsort(np.abs(resid), kind="stable")
    candidates = order[np.abs(resid[order]) <= 1e-7 * scale]
    p = X.shape[1]
    if candidates.size < p:
        return beta
    # pick p linearly independent interpolated rows
    _, R, piv = scipy.linalg.qr(X[candidates].T, pivoting=True, mode="economic")
    if abs(R[p - 1, p - 1]) <= 1e-10 * abs(R[0, 0]):
        return beta
    basis = np.sort(candidates[piv[:p]])
    exact = np.linalg.solve(X[basis], y[basis])
    if check_loss(y - X @ exact, q) <= check_loss(resid, q) * (1.0 + 1e-12) + 1e-12:
        return exact
    return beta


def hall_sheather_bandwidth(n: int, q: float, alpha: float = 0.05) -> float:
    z = _STD_NORMAL.inv_cdf(1.0 - alpha / 2.0)
    x = _STD_NORMAL.inv_cdf(q)
    f = _STD_NORMAL.pdf(x)
    return n ** (-1.0 / 3.0) * z ** (2.0 / 3.0) * (1.5 * f * f / (2.0 * x * x + 1.0)) ** (1.0 / 3.0)


def _sparsity(X, y, q, beta, names) -> tuple[float, float, str]:
    """Sparsity 1/f at the quantile, by the fitted-values difference quotient.

    The model is refit at q -/+ h (Hall-Sheather h) and the two fitted lines are
    differenced at the covariate means. Falls back to the empirical residual
    quantiles if that quotient is not positive.
    """
    n = len(y)
    h = hall_sheather_bandwidth(n, q)
    lo = max(q - h, 1.0 / (2.0 * n))
    hi = min(q + h, 1.0 - 1.0 / (2.0 * n))
    xbar = X.mean(axis=0)
    s = float(xbar @ (solve_rq(X, y, hi, names) - solve_rq(X, y, lo, names))) / (hi - lo)
    if s > 0:
        return s, h, "fitted"
    resid = y - X @ beta
    r_hi, r_lo = np.quantile(resid, [hi, lo], method="inverted_cdf")
    return float(r_hi - r_lo) / (hi - lo), h, "residual"


def fit_qreg(frame: ModelFrame, spec: EstimatorSpec | None = None) -> FitResult:
    """Quantile regression at ``spec.q`` with i.i.d. sandwich standard errors.

    The covariance is ``q(1-q) s^2 (X'X)^-1`` with ``s`` the estimated sparsity.
    ``pseudo_r2`` is one minus the ratio of the minimized check loss to the
    check loss about the unconditional q-quantile.
    """
    spec = spec or EstimatorSpec(kind="qreg")
    q = spec.q
    X, y, names = frame.X, frame.y, frame.names
    n, p = X.shape
    beta = solve_rq(X, y, q, names)
    resid = y - X @ beta
    sum_adev = check_loss(resid, q)
    about = float(np.quantile(y, q, method="inverted_cdf"))
    sum_rdev = check_loss(y - about, q)

    warnings = []
    _, XtX_inv = solve_least_squares(X, y, names)
    sparsity, h, method = _sparsity(X, y, q, beta, names)
    if method != "fitted":
        warnings.append("qreg: fitted-value sparsity estimate not positive; used residual quantiles")
    if not sparsity > 0:
        warnings.append("qreg: sparsity estimate is zero; standard errors are zero")
        sparsity = 0.0
    vcov = q * (1.0 - q) * sparsity**2 * XtX_inv

    return FitResult(
        estimator_tag="qreg",
        names=names,
        beta=beta,
        vcov=vcov,
        n_obs=n,
        df_resid=n - p,
        diagnostics={
            "q": q,
            "pseudo_r2": 1.0 - sum_adev / sum_rdev if sum_rdev > 0 else 1.0,
            "sum_adev": sum_adev,
            "sum_rdev": sum_rdev,
            "raw_about": about,
            "sparsity": sparsity,
            "bandwidth": h,
        },
        warnings=warnings,
    )


def fit_qreg_bootstrap(frame: ModelFrame, spec: EstimatorSpec | None = None) -> FitResult:
    """Quantile regression with case-resampling bootstrap covariance.

    Replicate ``i`` draws n rows with replacement from a stream seeded by
    ``(spec.seed, i)``, so results do not depend on execution order.
    Degenerate resamples are skipped; more than ``reps/2`` failures is an error.
    """
    spec = spec or EstimatorSpec(kind="qreg_bootstrap")
    point = fit_qreg(frame, spec)
    X, y, names = frame.X, frame.y, frame.names
    n, p = X.shape

    draws = []
    failures = 0
    for i in range(spec.reps):
        idx = replicate_rng(spec.seed, i).integers(0, n, size=n)
        try:
            draws.append(solve_rq(X[idx], y[idx], spec.q, names))
        except (CollinearityError, DegenerateFitError) as exc:
            failures += 1
            log.debug("bootstrap replicate %d skipped: %s", i, exc)
    if failures * 2 > spec.reps:
        raise BootstrapError(
            f"{failures} of {spec.reps} bootstrap replicates failed (degenerate resamples)"
        )
    B = np.vstack(draws)
    vcov = np.atleast_2d(np.cov(B, rowvar=False, ddof=1))

    warnings = list(point.warnings)
    if failures:
        warnings.append(f"qreg bootstrap: {failures} of {spec.reps} replicates skipped")
    diagnostics = dict(point.diagnostics)
    diagnostics.update(reps=float(spec.reps), reps_ok=float(len(draws)))
    return FitResult(
        estimator_tag="qreg_bootstrap",
        names=names,
        beta=point.beta,
        vcov=vcov,
        n_obs=n,
        df_resid=n - p,
        diagnostics=diagnostics,
        warnings=warnings,
    )
