"""Coefficient equality tests between two fitted models.

Per variable::

    diff_j = b1_j - b2_j
    se_j   = sqrt(se1_j^2 + se2_j^2)          (estimates treated as independent)
    t_j    = diff_j / se_j

with a two-sided p-value from Student's t on ``min(df1, df2)`` degrees of
freedom (the one available df if only one model has residual df, the normal
distribution if neither does).

Jointly, over all shared slopes (the intercept is excluded)::

    chi2 = d' (V1 + V2)^-1 d,   df = number of compared slopes

``variance="difference"`` swaps in the Hausman form ``(V1 - V2)^-1`` as a
diagnostic; it is never the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .data import CONSTANT, Dataset, RowFilter, build_frame
from .errors import AlignmentError, PanelError
from .estimators import EstimatorSpec, FitResult, fit
from .numerics import chi2_sf, invert_spd, student_t_sf2

__all__ = [
    "AlignedPair",
    "BiasRow",
    "JointTest",
    "BiasTestReport",
    "align",
    "variable_bias_test",
    "joint_bias_test",
    "compare_fits",
    "run_biastest",
]

JOINT_VARIANCES = ("sum", "difference")


@dataclass
class AlignedPair:
    names: list[str]
    b1: np.ndarray
    b2: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    df1: int | None
    df2: int | None
    n1: int
    n2: int
    warnings: list[str] = field(default_factory=list)

    @property
    def df(self) -> float:
        """Degrees of freedom for the per-variable t tests (inf = normal)."""
        dfs = [d for d in (self.df1, self.df2) if d is not None]
        return float(min(dfs)) if dfs else math.inf


@dataclass(frozen=True)
class BiasRow:
    name: str
    b1: float
    b2: float
    diff: float
    se_diff: float
    t_stat: float
    p_value: float


@dataclass(frozen=True)
class JointTest:
    chi2: float
    df: int
    p: float
    variance: str = "sum"


def align(fit1: FitResult, fit2: FitResult) -> AlignedPair:
    """Restrict both fits to their shared slopes, in ``fit1`` order."""
    shared = [n for n in fit1.names if n != CONSTANT and n in fit2.names]
    if not shared:
        raise AlignmentError("the two models share no slope coefficients to compare")
    warnings = []
    only1 = [n for n in fit1.names if n != CONSTANT and n not in shared]
    only2 = [n for n in fit2.names if n != CONSTANT and n not in shared]
    if only1 or only2:
        warnings.append(
            "variables not in both models were left out of the comparison: "
            + ", ".join(only1 + only2)
        )
    i1 = [fit1.names.index(n) for n in shared]
    i2 = [fit2.names.index(n) for n in shared]
    return AlignedPair(
        names=shared,
        b1=fit1.beta[i1].copy(),
        b2=fit2.beta[i2].copy(),
        V1=fit1.vcov[np.ix_(i1, i1)].copy(),
        V2=fit2.vcov[np.ix_(i2, i2)].copy(),
        df1=fit1.df_resid,
        df2=fit2.df_resid,
        n1=fit1.n_obs,
        n2=fit2.n_obs,
        warnings=warnings,
    )


def variable_bias_test(pair: AlignedPair, warnings: list[str] | None = None) -> list[BiasRow]:
    df = pair.df
    rows = []
    for j, name in enumerate(pair.names):
        diff = float(pair.b1[j] - pair.b2[j])
        se = math.sqrt(max(pair.V1[j, j], 0.0) + max(pair.V2[j, j], 0.0))
        if se > 0:
            t = diff / se
            p = student_t_sf2(t, df)
        elif diff == 0:
            t, p = 0.0, 1.0
        else:
            t, p = math.copysign(math.inf, diff), 0.0
            if warnings is not None:
                warnings.append(f"{name}: zero standard error with nonzero difference")
        rows.append(BiasRow(name, float(pair.b1[j]), float(pair.b2[j]), diff, se, t, p))
    return rows


def joint_bias_test(
    pair: AlignedPair,
    variance: str = "sum",
    warnings: list[str] | None = None,
) -> JointTest:
    """Wald-type chi-squared test that all compared slopes are equal."""
    if variance not in JOINT_VARIANCES:
        raise ValueError(f"variance must be one of {JOINT_VARIANCES}")
    d = pair.b1 - pair.b2
    p = len(d)
    if variance == "sum":
        V_inv, rank = invert_spd(pair.V1 + pair.V2)
        chi2 = max(float(d @ V_inv @ d), 0.0)
    else:
        V_inv, rank, indefinite = _signed_inverse(pair.V1 - pair.V2)
        chi2 = float(d @ V_inv @ d)
        if indefinite and warnings is not None:
            warnings.append(
                "joint test: V1 - V2 is not positive semidefinite; "
                "reporting the absolute value of the statistic"
            )
        chi2 = abs(chi2)
    if rank < p and warnings is not None:
        warnings.append(
            f"joint test: variance matrix not of full rank; "
            f"generalized inverse used, df reduced from {p} to {rank}"
        )
    if rank == 0:
        return JointTest(chi2, 0, 1.0, variance)
    return JointTest(chi2, rank, chi2_sf(chi2, rank), variance)


def _signed_inverse(A: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, int, bool]:
    """Generalized inverse keeping eigenvalues of either sign."""
    A = 0.5 * (A + A.T)
    evals, evecs = np.linalg.eigh(A)
    keep = np.abs(evals) > tol * np.max(np.abs(evals), initial=0.0)
    inv = (evecs[:, keep] / evals[keep]) @ evecs[:, keep].T
    return inv, int(keep.sum()), bool(np.any(evals[keep] < 0))


@dataclass
class BiasTestReport:
    """Everything a bias-test run produces, mirroring the stored results."""

    depvar: str
    indep: list[str]
    model1: FitResult
    model2: FitResult
    rows: list[BiasRow]
    joint: JointTest
    df_t: float
    warnings: list[str] = field(default_factory=list)

    # stored-results views
    @property
    def b1(self) -> np.ndarray:
        return self.model1.beta

    @property
    def V1(self) -> np.ndarray:
        return self.model1.vcov

    @property
    def b2(self) -> np.ndarray:
        return self.model2.beta

    @property
    def V2(self) -> np.ndarray:
        return self.model2.vcov

    @property
    def tstat(self) -> np.ndarray:
        return np.array([r.t_stat for r in self.rows])

    @property
    def pvalues(self) -> np.ndarray:
        return np.array([r.p_value for r in self.rows])

    @property
    def chi2(self) -> float:
        return self.joint.chi2

    @property
    def df_chi2(self) -> int:
        return self.joint.df

    @property
    def p_chi2(self) -> float:
        return self.joint.p

    def to_dict(self) -> dict[str, Any]:
        return {
            "depvar": self.depvar,
            "indep": list(self.indep),
            "names": [r.name for r in self.rows],
            "b1": self.b1.tolist(),
            "V1": self.V1.tolist(),
            "b2": self.b2.tolist(),
            "V2": self.V2.tolist(),
            "tstat": self.tstat.tolist(),
            "pvalues": self.pvalues.tolist(),
            "chi2": self.chi2,
            "df_chi2": self.df_chi2,
            "p_chi2": self.p_chi2,
            "joint_variance": self.joint.variance,
            "df_t": None if math.isinf(self.df_t) else self.df_t,
            "rows": [
                {
                    "name": r.name,
                    "b1": r.b1,
                    "b2": r.b2,
                    "diff": r.diff,
                    "se_diff": r.se_diff,
                    "t_stat": r.t_stat,
                    "p_value": r.p_value,
                }
                for r in self.rows
            ],
            "model1": self.model1.to_dict(),
            "model2": self.model2.to_dict(),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BiasTestReport":
        return cls(
            depvar=d["depvar"],
            indep=list(d["indep"]),
            model1=FitResult.from_dict(d["model1"]),
            model2=FitResult.from_dict(d["model2"]),
            rows=[BiasRow(**r) for r in d["rows"]],
            joint=JointTest(d["chi2"], d["df_chi2"], d["p_chi2"], d["joint_variance"]),
            df_t=math.inf if d["df_t"] is None else float(d["df_t"]),
            warnings=list(d["warnings"]),
        )


def compare_fits(
    fit1: FitResult,
    fit2: FitResult,
    depvar: str = "",
    indep: Sequence[str] = (),
    variance: str = "sum",
) -> BiasTestReport:
    """Run both tests on two already fitted models."""
    pair = align(fit1, fit2)
    warnings = [*fit1.warnings, *fit2.warnings, *pair.warnings]
    if fit1.n_obs != fit2.n_obs:
        warnings.append(
            f"models use different samples (n1={fit1.n_obs}, n2={fit2.n_obs}); "
            "compared as estimated"
        )
    if math.isinf(pair.df):
        warnings.append("neither model reports residual df; per-variable p-values use the normal distribution")
    rows = variable_bias_test(pair, warnings)
    joint = joint_bias_test(pair, variance, warnings)
    return BiasTestReport(
        depvar=depvar,
        indep=list(indep) or list(pair.names),
        model1=fit1,
        model2=fit2,
        rows=rows,
        joint=joint,
        df_t=pair.df,
        warnings=warnings,
    )


def run_biastest(
    ds: Dataset,
    depvar: str,
    indep: Sequence[str],
    filter: RowFilter | None,
    spec1: EstimatorSpec,
    spec2: EstimatorSpec,
    variance: str = "sum",
) -> BiasTestReport:
    """Build one shared frame, fit both models and compare them."""
    if (spec1.needs_panel or spec2.needs_panel) and ds.panel is None:
        raise PanelError("panel estimators need a panel index; set one with set_panel")
    frame = build_frame(ds, depvar, indep, filter)
    fit1 = fit(frame, spec1, ds)
    fit2 = fit(frame, spec2, ds)
    return compare_fits(fit1, fit2, depvar, indep, variance)
