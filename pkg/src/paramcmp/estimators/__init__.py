"""Regression estimators returning a uniform :class:`FitResult`."""

from __future__ import annotations

from ..data import Dataset, ModelFrame
from ..errors import PanelError
from .base import KINDS, EstimatorSpec, FitResult
from .ols import fit_ols
from .panel import fit_fe, fit_re
from .quantile import fit_qreg, fit_qreg_bootstrap
from .robust import fit_rreg

__all__ = [
    "KINDS",
    "EstimatorSpec",
    "FitResult",
    "fit",
    "fit_ols",
    "fit_rreg",
    "fit_qreg",
    "fit_qreg_bootstrap",
    "fit_fe",
    "fit_re",
]


def fit(frame: ModelFrame, spec: EstimatorSpec, ds: Dataset | None = None) -> FitResult:
    """Dispatch on ``spec.kind``; panel kinds need the dataset carrying the panel index."""
    if spec.kind == "ols":
        return fit_ols(frame)
    if spec.kind == "rreg":
        return fit_rreg(frame, spec)
    if spec.kind == "qreg":
        return fit_qreg(frame, spec)
    if spec.kind == "qreg_bootstrap":
        return fit_qreg_bootstrap(frame, spec)
    if ds is None or ds.panel is None:
        raise PanelError(f"estimator '{spec.kind}' requires a panel index")
    if spec.kind == "fe":
        return fit_fe(frame, ds)
    return fit_re(frame, ds)
