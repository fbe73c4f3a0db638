"""Ordinary least squares."""

from __future__ import annotations

import numpy as np

from ..data import ModelFrame
from ..numerics import f_sf, solve_least_squares
from .base import FitResult


def fit_ols(frame: ModelFrame) -> FitResult:
    """OLS with the classical ``s^2 (X'X)^-1`` covariance.

    Diagnostics mirror a regression header: sums of squares, ``r2``,
    ``adj_r2``, ``F`` on (k, n-k-1) degrees of freedom and root MSE.
    """
    X, y = frame.X, frame.y
    n, p = X.shape
    k = p - 1
    beta, XtX_inv = solve_least_squares(X, y, frame.names)
    resid = y - X @ beta
    df_resid = n - p
    rss = float(resid @ resid)
    s2 = rss / df_resid
    tss = float(np.sum((y - y.mean()) ** 2))
    mss = tss - rss
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    diagnostics = {
        "mss": mss,
        "rss": rss,
        "tss": tss,
        "df_model": float(k),
        "r2": r2,
        "adj_r2": 1.0 - (1.0 - r2) * (n - 1) / df_resid,
        "rmse": float(np.sqrt(s2)),
    }
    if k > 0:
        F = (mss / k) / s2 if s2 > 0 else float("inf")
        diagnostics["F"] = F
        diagnostics["F_df1"] = float(k)
        diagnostics["F_df2"] = float(df_resid)
        diagnostics["F_p"] = f_sf(F, k, df_resid)
    return FitResult(
        estimator_tag="ols",
        names=frame.names,
        beta=beta,
        vcov=s2 * XtX_inv,
        n_obs=n,
        df_resid=df_resid,
        diagnostics=diagnostics,
    )
