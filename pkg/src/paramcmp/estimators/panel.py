"""Fixed-effects (within) and random-effects (Swamy-Arora GLS) panel regressions."""

from __future__ import annotations

import numpy as np

from ..data import Dataset, ModelFrame
from ..errors import CollinearityError, DegenerateFitError, PanelError
from ..numerics import chi2_sf, f_sf, invert_spd, solve_least_squares
from .base import FitResult


class _Groups:
    """Group bookkeeping for the rows of a model frame."""

    def __init__(self, frame: ModelFrame, ds: Dataset):
        if ds.panel is None:
            raise PanelError("panel estimators need a panel index (group, time)")
        codes = ds.group_index()[np.asarray(frame.row_origin, dtype=np.intp) - 1]
        _, self.code = np.unique(codes, return_inverse=True)
        self.G = int(self.code.max()) + 1
        self.T = np.bincount(self.code, minlength=self.G).astype(float)

    def means(self, a: np.ndarray) -> np.ndarray:
        """Group means, one row per group."""
        a2 = a.reshape(len(a), -1)
        sums = np.zeros((self.G, a2.shape[1]))
        np.add.at(sums, self.code, a2)
        out = sums / self.T[:, None]
        return out if a.ndim > 1 else out[:, 0]

    def expand(self, g: np.ndarray) -> np.ndarray:
        return g[self.code]

    def summary(self) -> dict[str, float]:
        return {
            "n_groups": float(self.G),
            "T_min": float(self.T.min()),
            "T_avg": float(self.T.mean()),
            "T_max": float(self.T.max()),
        }


def _corr2(a: np.ndarray, b: np.ndarray) -> float:
    if np.std(a) == 0 or np.std(b) == 0:
        return float("nan")
    return float(np.corrcoef(a, b)[0, 1] ** 2)


def _within(frame: ModelFrame, groups: _Groups):
    """Slope coefficients and residual sum of squares of the within regression."""
    k = frame.k
    Xs, y = frame.X[:, :k], frame.y
    Xw = Xs - groups.expand(groups.means(Xs))
    yw = y - groups.expand(groups.means(y))
    for j, name in enumerate(frame.indep):
        scale = np.linalg.norm(Xs[:, j]) + 1e-300
        if np.linalg.norm(Xw[:, j]) <= 1e-10 * scale:
            raise CollinearityError(
                f"column {name} has no within-group variation", name
            )
    n = frame.n
    df = n - k - groups.G
    if df <= 0:
        raise DegenerateFitError(
            f"within regression has {df} residual degrees of freedom "
            f"(n={n}, k={k}, groups={groups.G})"
        )
    return Xw, yw, df


def fit_fe(frame: ModelFrame, ds: Dataset) -> FitResult:
    """Within estimator with the constant recovered from the grand means.

    The regression is run on ``y - ybar_i + ybar`` against ``x - xbar_i + xbar``
    and a constant, with ``s^2 = RSS / (n - k - G)``.
    """
    groups = _Groups(frame, ds)
    k, n = frame.k, frame.n
    Xs, y = frame.X[:, :k], frame.y
    Xw, yw, df = _within(frame, groups)

    Xt = np.column_stack([Xw + Xs.mean(axis=0), np.ones(n)])
    yt = yw + y.mean()
    beta, XtX_inv = solve_least_squares(Xt, yt, frame.names)
    resid = yt - Xt @ beta
    rss = float(resid @ resid)
    s2e = rss / df
    slopes, cons = beta[:k], beta[k]

    tss_w = float(yw @ yw)
    r2_w = 1.0 - rss / tss_w if tss_w > 0 else 1.0
    u = groups.means(y) - groups.means(Xs) @ slopes - cons
    sigma_u = float(np.std(u, ddof=1)) if groups.G > 1 else 0.0
    diagnostics = {
        **groups.summary(),
        "r2_within": r2_w,
        "r2_between": _corr2(groups.means(y), groups.means(Xs) @ slopes),
        "r2_overall": _corr2(y, Xs @ slopes),
        "sigma_u": sigma_u,
        "sigma_e": float(np.sqrt(s2e)),
        "rho": sigma_u**2 / (sigma_u**2 + s2e) if sigma_u**2 + s2e > 0 else 0.0,
        "corr_u_xb": float(np.corrcoef(groups.expand(u), Xs @ slopes)[0, 1])
        if groups.G > 1 else float("nan"),
        "rss": rss,
    }
    if r2_w < 1.0:
        F = (r2_w / k) / ((1.0 - r2_w) / df)
        diagnostics.update(F=F, F_df1=float(k), F_df2=float(df), F_p=f_sf(F, k, df))
    if groups.G > 1 and rss > 0:
        b_pooled, _ = solve_least_squares(frame.X, y, frame.names)
        e_pooled = y - frame.X @ b_pooled
        F_u = ((float(e_pooled @ e_pooled) - rss) / (groups.G - 1)) / s2e
        diagnostics.update(
            F_u=F_u, F_u_df1=float(groups.G - 1), F_u_df2=float(df),
            F_u_p=f_sf(F_u, groups.G - 1, df),
        )
    return FitResult(
        estimator_tag="fe",
        names=frame.names,
        beta=beta,
        vcov=s2e * XtX_inv,
        n_obs=n,
        df_resid=df,
        diagnostics=diagnostics,
    )


def swamy_arora(frame: ModelFrame, groups: _Groups) -> tuple[float, float]:
    """Variance components ``(sigma_u^2, sigma_e^2)``; sigma_u^2 is floored at 0.

    sigma_e^2 comes from the within residuals. sigma_u^2 is the between-regression
    residual variance (``RSS_b / (G - k - 1)``) less ``sigma_e^2 / T_bar``, with
    ``T_bar`` the harmonic mean of group sizes.
    """
    k = frame.k
    Xw, yw, df = _within(frame, groups)
    b_w, _ = solve_least_squares(Xw, yw, list(frame.indep))
    e_w = yw - Xw @ b_w
    s2e = float(e_w @ e_w) / df

    G = groups.G
    if G <= k + 1:
        raise DegenerateFitError(
            f"between regression needs more than {k + 1} groups, got {G}"
        )
    Xb = np.column_stack([groups.means(frame.X[:, :k]), np.ones(G)])
    yb = groups.means(frame.y)
    b_b, _ = solve_least_squares(Xb, yb, frame.names)
    e_b = yb - Xb @ b_b
    T_bar = G / float(np.sum(1.0 / groups.T))
    s2u = float(e_b @ e_b) / (G - k - 1) - s2e / T_bar
    return max(s2u, 0.0), s2e


def fit_re(frame: ModelFrame, ds: Dataset, theta: float | np.ndarray | None = None) -> FitResult:
    """Random-effects GLS by quasi-demeaning.

    Each group is transformed with ``theta_i = 1 - sqrt(s2e / (T_i s2u + s2e))``
    and OLS is run on the result; inference is large-sample (no residual df).
    ``theta`` overrides the estimated per-group factors (scalar or per group).
    """
    groups = _Groups(frame, ds)
    k, n = frame.k, frame.n
    Xs, y = frame.X[:, :k], frame.y
    s2u, s2e = swamy_arora(frame, groups)

    if theta is None:
        th = 1.0 - np.sqrt(s2e / (groups.T * s2u + s2e))
    else:
        th = np.broadcast_to(np.asarray(theta, dtype=float), (groups.G,)).copy()
    th_obs = groups.expand(th)

    X_star = np.column_stack([
        Xs - th_obs[:, None] * groups.expand(groups.means(Xs)),
        1.0 - th_obs,
    ])
    y_star = y - th_obs * groups.expand(groups.means(y))
    beta, XtX_inv = solve_least_squares(X_star, y_star, frame.names)
    resid = y_star - X_star @ beta
    sigma2 = float(resid @ resid) / (n - k - 1)
    vcov = sigma2 * XtX_inv
    slopes = beta[:k]

    V_inv, _ = invert_spd(vcov[:k, :k])
    wald = float(slopes @ V_inv @ slopes)
    yw = y - groups.expand(groups.means(y))
    xw = (Xs - groups.expand(groups.means(Xs))) @ slopes
    diagnostics = {
        **groups.summary(),
        "r2_within": _corr2(yw, xw),
        "r2_between": _corr2(groups.means(y), groups.means(Xs) @ slopes),
        "r2_overall": _corr2(y, Xs @ slopes),
        "sigma_u": float(np.sqrt(s2u)),
        "sigma_e": float(np.sqrt(s2e)),
        "rho": s2u / (s2u + s2e) if s2u + s2e > 0 else 0.0,
        "theta_min": float(th.min()),
        "theta_max": float(th.max()),
        "wald_chi2": wald,
        "wald_df": float(k),
        "wald_p": chi2_sf(wald, k),
    }
    return FitResult(
        estimator_tag="re",
        names=frame.names,
        beta=beta,
        vcov=vcov,
        n_obs=n,
        df_resid=None,
        diagnostics=diagnostics,
    )
