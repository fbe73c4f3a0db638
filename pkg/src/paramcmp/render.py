"""Text tables and JSON for a :class:`BiasTestReport`."""

from __future__ import annotations

import json
import math

from .biastest import BiasTestReport
from .estimators import FitResult
from .numerics import normal_sf2, student_t_sf2

__all__ = ["render_text", "render_json", "report_from_json", "render_fit"]

_RULE = "-" * 78


def _num(x: float, width: int = 11) -> str:
    if math.isnan(x):
        return f"{'.':>{width}}"
    return f"{x:>{width}.7g}"


def _fixed4(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.4f}"


def _header(fit: FitResult) -> list[tuple[str, str]]:
    d = fit.diagnostics
    lines = [("Number of obs", f"{fit.n_obs}")]
    if fit.estimator_tag in ("fe", "re") and "n_groups" in d:
        lines += [
            ("Number of groups", f"{int(d['n_groups'])}"),
            ("Obs per group: min", f"{int(d['T_min'])}"),
            ("               avg", f"{d['T_avg']:.1f}"),
            ("               max", f"{int(d['T_max'])}"),
            ("R-squared: within", f"{d['r2_within']:.4f}"),
            ("           between", f"{d['r2_between']:.4f}"),
            ("           overall", f"{d['r2_overall']:.4f}"),
        ]
        if fit.estimator_tag == "fe":
            lines.append(("corr(u_i, Xb)", f"{d['corr_u_xb']:.4f}"))
        else:
            lines.append(("corr(u_i, X)", "0 (assumed)"))
            lines += [
                (f"Wald chi2({int(d['wald_df'])})", f"{d['wald_chi2']:.2f}"),
                ("Prob > chi2", f"{d['wald_p']:.4f}"),
            ]
    if "F" in d:
        lines += [
            (f"F({int(d['F_df1'])}, {int(d['F_df2'])})", f"{d['F']:.2f}"),
            ("Prob > F", f"{d['F_p']:.4f}"),
        ]
    if fit.estimator_tag == "ols" and "r2" in d:
        lines += [
            ("R-squared", f"{d['r2']:.4f}"),
            ("Adj R-squared", f"{d['adj_r2']:.4f}"),
            ("Root MSE", f"{d['rmse']:.4g}"),
        ]
    if fit.estimator_tag in ("qreg", "qreg_bootstrap") and "q" in d:
        lines += [
            ("Quantile", f"{d['q']:g}"),
            ("Raw sum of deviations", f"{d['sum_rdev']:.7g} (about {d['raw_about']:.7g})"),
            ("Min sum of deviations", f"{d['sum_adev']:.7g}"),
            ("Pseudo R2", f"{d['pseudo_r2']:.4f}"),
        ]
        if "reps" in d:
            lines.append(("Bootstrap replications", f"{int(d['reps_ok'])} of {int(d['reps'])}"))
    if fit.estimator_tag == "rreg" and fit.dropped_rows:
        lines.append(("Dropped (Cook's D)", " ".join(str(r) for r in fit.dropped_rows)))
    return lines


def render_fit(fit: FitResult, depvar: str) -> str:
    """Estimation summary block for one model."""
    out = [fit.title]
    width = max(len(k) for k, _ in _header(fit))
    out += [f"  {k:<{width}} = {v}" for k, v in _header(fit)]
    stat = fit.stat_label
    out += [
        _RULE,
        f"{depvar[:12]:>12} | {'Coefficient':>11} {'Std. err.':>11} {stat:>9} {'P>|' + stat + '|':>8}",
        _RULE,
    ]
    df = math.inf if fit.df_resid is None else fit.df_resid
    for name, b, se in zip(fit.names, fit.beta, fit.se):
        if se > 0:
            t = b / se
            p = student_t_sf2(t, df) if not math.isinf(df) else normal_sf2(t)
            tail = f"{t:>9.2f} {p:>8.3f}"
        else:
            tail = f"{'.':>9} {'.':>8}"
        out.append(f"{name[:12]:>12} | {_num(b)} {_num(se)} {tail}")
    out.append(_RULE)
    if fit.estimator_tag in ("fe", "re") and "sigma_u" in fit.diagnostics:
        d = fit.diagnostics
        out += [
            f"{'sigma_u':>12} | {_num(d['sigma_u'])}",
            f"{'sigma_e':>12} | {_num(d['sigma_e'])}",
            f"{'rho':>12} | {_num(d['rho'])}   (fraction of variance due to u_i)",
            _RULE,
        ]
        if "F_u" in d:
            out.append(
                f"F test that all u_i=0: F({int(d['F_u_df1'])}, {int(d['F_u_df2'])}) = "
                f"{d['F_u']:.2f}   Prob > F = {d['F_u_p']:.4f}"
            )
    return "\n".join(out)


def render_text(report: BiasTestReport) -> str:
    """Human-readable report: both model summaries, then both tests."""
    out = [
        f"Dependent variable: {report.depvar}",
        f"Independent variables: {' '.join(report.indep)}",
        "",
        "Model 1 Estimation Results",
        "",
        render_fit(report.model1, report.depvar),
        "",
        "Model 2 Estimation Results",
        "",
        render_fit(report.model2, report.depvar),
        "",
        "Variable Bias Test:",
        "H0: The parameters are equal",
        "",
    ]
    p_label = "P>|t|" if not math.isinf(report.df_t) else "P>|z|"
    cols = ("Variables", "Model 1", "Model 2", "Diff.", "t-stat", p_label)
    table = [cols] + [
        (r.name, _fixed4(r.b1), _fixed4(r.b2), _fixed4(r.diff), _fixed4(r.t_stat), _fixed4(r.p_value))
        for r in report.rows
    ]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    for i, row in enumerate(table):
        first = f"{row[0]:<{widths[0]}}"
        rest = "  ".join(f"{cell:>{w}}" for cell, w in zip(row[1:], widths[1:]))
        out.append(f"{first}  {rest}")
        if i == 0:
            out.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    variance = "V1 + V2" if report.joint.variance == "sum" else "V1 - V2, Hausman form"
    out += [
        "",
        "Jointly Bias Test:",
        "H0: All parameters are equal",
        f"chi2({report.df_chi2}) = {report.chi2:.4f}",
        f"Prob > chi2 = {report.p_chi2:.4f}",
        "",
        f"Note: joint statistic inverts {variance}; "
        + (
            f"t tests on {int(report.df_t)} df."
            if not math.isinf(report.df_t)
            else "no residual df available, per-variable tests use the normal distribution."
        ),
    ]
    for w in report.warnings:
        out.append(f"Warning: {w}")
    return "\n".join(out) + "\n"


def render_json(report: BiasTestReport) -> bytes:
    """Deterministic JSON; floats are written with round-trip precision."""
    return (json.dumps(report.to_dict(), indent=2, allow_nan=True) + "\n").encode("utf-8")


def report_from_json(data: bytes | str) -> BiasTestReport:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return BiasTestReport.from_dict(json.loads(data))
