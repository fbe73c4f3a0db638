"""Robust regression: Cook's distance screen, then Huber and biweight IRLS.

Staging follows the classic ``rreg`` recipe. An initial OLS fit removes
gross influence points (Cook's D above the cutoff). Huber iterations run to
convergence, then Tukey biweight iterations from the Huber solution. The
residual scale is recomputed every iteration as 1.4826 times the median
absolute deviation from the median residual. Both stages stop when no weight
changes by more than ``tolerance``.

Standard errors use the pseudovalue method of Street, Carroll & Ruppert
(1988): ``K^2 * sum(e^2)/(n-p) * (X'X)^-1`` with pseudo-residuals
``e = c*s*psi(u)/mean(psi'(u))`` and ``K = 1 + (p/n)(1-m)/m``.
"""

from __future__ import annotations

import logging

import numpy as np

from ..data import ModelFrame
from ..errors import DegenerateFitError
from ..numerics import f_sf, invert_spd, solve_least_squares
from .base import EstimatorSpec, FitResult

log = logging.getLogger(__name__)

MAD_FACTOR = 1.4826


def mad_scale(resid: np.ndarray) -> float:
    return MAD_FACTOR * float(np.median(np.abs(resid - np.median(resid))))


def huber_weights(u: np.ndarray, c: float) -> np.ndarray:
    au = np.abs(u)
    with np.errstate(divide="ignore"):
        return np.where(au <= c, 1.0, c / au)


def biweight_weights(u: np.ndarray, c: float) -> np.ndarray:
    z = u / c
    return np.where(np.abs(z) < 1.0, (1.0 - z * z) ** 2, 0.0)


def cooks_distance(X: np.ndarray, y: np.ndarray, names=None) -> np.ndarray:
    n, p = X.shape
    beta, XtX_inv = solve_least_squares(X, y, names)
    resid = y - X @ beta
    h = np.einsum("ij,jk,ik->i", X, XtX_inv, X)
    s2 = float(resid @ resid) / (n - p)
    if s2 == 0.0:
        return np.zeros(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = resid**2 / (p * s2) * h / (1.0 - h) ** 2
    return np.nan_to_num(d, nan=0.0, posinf=np.inf)


def _scaled_residuals(X, y, beta):
    resid = y - X @ beta
    s = mad_scale(resid)
    if s == 0.0:
        # More than half the residuals coincide: fall back to mean deviation.
        s = MAD_FACTOR * float(np.mean(np.abs(resid - np.median(resid))))
    if s == 0.0:
        return resid, 0.0, np.zeros_like(resid)
    return resid, s, resid / s


def _irls(X, y, beta, weights, weight_fn, c, spec, names, stage):
    w = weights
    s = 0.0
    for iteration in range(1, spec.max_iter + 1):
        _, s, u = _scaled_residuals(X, y, beta)
        w_new = weight_fn(u, c)
        if not np.any(w_new > 0):
            raise DegenerateFitError(f"all {stage} weights are zero")
        change = float(np.max(np.abs(w_new - w)))
        w = w_new
        sw = np.sqrt(w)
        beta, _ = solve_least_squares(X * sw[:, None], y * sw, names)
        log.debug("%s iteration %d: max weight change %.6g", stage, iteration, change)
        if change < spec.tolerance:
            return beta, w, s, iteration, True
    return beta, w, s, spec.max_iter, False


def fit_rreg(frame: ModelFrame, spec: EstimatorSpec | None = None) -> FitResult:
    """Iteratively reweighted robust regression (tag ``rreg``)."""
    spec = spec or EstimatorSpec(kind="rreg")
    names = frame.names
    X0, y0 = frame.X, frame.y

    cook = cooks_distance(X0, y0, names)
    keep = np.flatnonzero(~(cook > spec.cook_cutoff))
    dropped = [frame.row_origin[i] for i in np.flatnonzero(cook > spec.cook_cutoff)]
    X, y = X0[keep], y0[keep]
    n, p = X.shape
    if n <= p:
        raise DegenerateFitError(
            f"only {n} observations left after the Cook's distance screen"
        )

    warnings = []
    beta, _ = solve_least_squares(X, y, names)
    w = np.ones(n)
    beta, w, _, huber_iter, huber_ok = _irls(
        X, y, beta, w, huber_weights, spec.huber_c, spec, names, "Huber"
    )
    beta, w, scale, bw_iter, bw_ok = _irls(
        X, y, beta, w, biweight_weights, spec.biweight_c, spec, names, "biweight"
    )
    if not huber_ok:
        warnings.append(f"rreg: Huber iterations did not converge in {spec.max_iter} steps")
    if not bw_ok:
        warnings.append(f"rreg: biweight iterations did not converge in {spec.max_iter} steps")

    vcov = _pseudovalue_vcov(X, y, beta, scale, spec.biweight_c, names)

    k = p - 1
    diagnostics = {
        "scale": scale,
        "huber_iterations": float(huber_iter),
        "biweight_iterations": float(bw_iter),
        "converged": float(huber_ok and bw_ok),
        "min_weight": float(w.min()),
        "n_dropped": float(len(dropped)),
    }
    if k > 0:
        slopes = slice(0, k)
        V_inv, _ = invert_spd(vcov[slopes, slopes])
        F = float(beta[slopes] @ V_inv @ beta[slopes]) / k
        diagnostics.update(F=F, F_df1=float(k), F_df2=float(n - p), F_p=f_sf(F, k, n - p))

    return FitResult(
        estimator_tag="rreg",
        names=names,
        beta=beta,
        vcov=vcov,
        n_obs=n,
        df_resid=n - p,
        diagnostics=diagnostics,
        warnings=warnings,
        dropped_rows=dropped,
        weights=w,
    )


def _pseudovalue_vcov(X, y, beta, scale, c, names) -> np.ndarray:
    n, p = X.shape
    _, XtX_inv = solve_least_squares(X, y, names)
    if scale == 0.0:
        return np.zeros((p, p))
    cs = c * scale
    z = (y - X @ beta) / cs
    inside = np.abs(z) < 1.0
    psi = np.where(inside, z * (1.0 - z * z) ** 2, 0.0)
    dpsi = np.where(inside, (1.0 - z * z) * (1.0 - 5.0 * z * z), 0.0)
    m = float(dpsi.mean())
    if m <= 0.0:
        raise DegenerateFitError("biweight derivative has non-positive mean; cannot form SEs")
    K = 1.0 + (p / n) * (1.0 - m) / m
    pseudo = cs * psi / m
    sigma2 = float(pseudo @ pseudo) / (n - p)
    return K * K * sigma2 * XtX_inv
