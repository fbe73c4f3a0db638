"""Common result and option types for all estimators."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

KINDS = ("ols", "rreg", "qreg", "qreg_bootstrap", "fe", "re")

TITLES = {
    "ols": "Linear regression",
    "rreg": "Robust regression",
    "qreg": "Quantile regression",
    "qreg_bootstrap": "Quantile regression, bootstrap SEs",
    "fe": "Fixed-effects (within) regression",
    "re": "Random-effects GLS regression",
}


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run and its tuning options."""

    kind: str = "ols"
    q: float = 0.5
    reps: int = 100
    seed: int = 0
    huber_c: float = 1.345
    biweight_c: float = 4.685
    cook_cutoff: float = 1.0
    tolerance: float = 0.01
    max_iter: int = 50

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimator kind '{self.kind}'; expected one of {KINDS}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"quantile must lie in (0, 1), got {self.q}")
        if self.reps < 2:
            raise ValueError(f"bootstrap needs at least 2 replications, got {self.reps}")
        for name in ("huber_c", "biweight_c", "cook_cutoff", "tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def effects(self) -> str | None:
        return self.kind if self.kind in ("fe", "re") else None

    @property
    def needs_panel(self) -> bool:
        return self.kind in ("fe", "re")

    def with_(self, **changes) -> "EstimatorSpec":
        return replace(self, **changes)


@dataclass
class FitResult:
    """Uniform estimation output consumed by the bias test.

    ``vcov`` is symmetrized on construction and ``se`` is derived from it.
    ``df_resid`` is ``None`` for estimators reported with z statistics.
    ``dropped_rows`` lists 1-based data rows the estimator itself discarded
    (the Cook's distance screen of ``rreg``); ``weights`` holds final IRLS
    weights for the retained rows when the estimator has them.
    """

    estimator_tag: str
    names: list[str]
    beta: np.ndarray
    vcov: np.ndarray
    n_obs: int
    df_resid: int | None
    diagnostics: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    dropped_rows: list[int] = field(default_factory=list)
    weights: np.ndarray | None = field(default=None, repr=False, compare=False)
    se: np.ndarray = field(init=False)

    def __post_init__(self):
        self.names = list(self.names)
        self.beta = np.asarray(self.beta, dtype=float)
        vcov = np.asarray(self.vcov, dtype=float)
        self.vcov = 0.5 * (vcov + vcov.T)
        p = len(self.names)
        if self.beta.shape != (p,) or self.vcov.shape != (p, p):
            raise ValueError("beta, vcov and names have inconsistent sizes")
        self.se = np.sqrt(np.clip(np.diag(self.vcov), 0.0, None))

    @property
    def title(self) -> str:
        return TITLES[self.estimator_tag]

    @property
    def stat_label(self) -> str:
        return "t" if self.df_resid is not None else "z"

    def coef(self, name: str) -> float:
        return float(self.beta[self.names.index(name)])

    def stderr(self, name: str) -> float:
        return float(self.se[self.names.index(name)])

    def to_dict(self) -> dict[str, Any]:
        return {
            "estimator": self.estimator_tag,
            "names": list(self.names),
            "b": self.beta.tolist(),
            "V": self.vcov.tolist(),
            "se": self.se.tolist(),
            "n_obs": self.n_obs,
            "df_resid": self.df_resid,
            "diagnostics": {k: float(v) for k, v in self.diagnostics.items()},
            "warnings": list(self.warnings),
            "dropped_rows": list(self.dropped_rows),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "FitResult":
        return cls(
            estimator_tag=d["estimator"],
            names=d["names"],
            beta=np.array(d["b"], dtype=float),
            vcov=np.array(d["V"], dtype=float).reshape(len(d["names"]), len(d["names"])),
            n_obs=d["n_obs"],
            df_resid=d["df_resid"],
            diagnostics=dict(d["diagnostics"]),
            warnings=list(d["warnings"]),
            dropped_rows=list(d["dropped_rows"]),
        )
