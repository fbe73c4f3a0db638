"""``paramcmp`` command line.

Example, OLS against robust regression on the bundled crime data::

    paramcmp crime.csv --dep crime --indep pctmetro pcths poverty --m1 reg --m2 rreg

Exit codes: 0 success, 1 usage error, 2 data error, 3 estimation error.
Warnings are printed but never change the exit code.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .biastest import JOINT_VARIANCES, run_biastest
from .data import load_csv, parse_filter, resolve_data_path, set_panel
from .errors import DataError, EstimationError, UsageError
from .estimators import EstimatorSpec
from .render import render_json, render_text

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ESTIMATION = 0, 1, 2, 3

MODEL_NAMES = ("ols", "reg", "rreg", "qreg", "sqreg", "xtreg")
DEFAULT_SEED = 12345

_OPTION = re.compile(r"\s*([A-Za-z_]+)\s*(?:\(\s*([^()]*?)\s*\))?\s*")

# option name -> (EstimatorSpec field, converter, models accepting it)
_VALUE_OPTIONS = {
    "q": ("q", "quantile", ("qreg", "sqreg")),
    "quantile": ("q", "quantile", ("qreg", "sqreg")),
    "r": ("reps", "int", ("sqreg",)),
    "reps": ("reps", "int", ("sqreg",)),
    "seed": ("seed", "int", ("sqreg",)),
    "huber": ("huber_c", "float", ("rreg",)),
    "biweight": ("biweight_c", "float", ("rreg",)),
    "cook": ("cook_cutoff", "float", ("rreg",)),
    "tolerance": ("tolerance", "float", ("rreg",)),
    "iterate": ("max_iter", "int", ("rreg",)),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class CliInvocation:
    data_path: str
    depvar: str
    indep: tuple[str, ...]
    if_expr: str | None
    in_range: str | None
    m1: str
    m2: str
    m1_opts: str
    m2_opts: str
    spec1: EstimatorSpec
    spec2: EstimatorSpec
    panel: tuple[str, str] | None
    seed: int
    json_path: str | None
    joint_variance: str
    quiet: bool


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="paramcmp",
        description="Fit two regression models and test whether their coefficients are equal.",
    )
    p.add_argument("data", help="CSV file (bare names are also looked up in the fixtures directory)")
    p.add_argument("--dep", required=True, help="dependent variable")
    p.add_argument("--indep", required=True, nargs="+", help="independent variables")
    p.add_argument("--if", dest="if_expr", metavar="EXPR",
                   help="row filter, e.g. 'poverty > 10 & pctmetro <= 90'")
    p.add_argument("--in", dest="in_range", metavar="FIRST,LAST",
                   help="1-based inclusive row range")
    p.add_argument("--m1", required=True, help=f"first model: {', '.join(MODEL_NAMES)}")
    p.add_argument("--m1-opts", default="", help="options for the first model, e.g. 'q(.25) r(100)'")
    p.add_argument("--m2", required=True, help="second model")
    p.add_argument("--m2-opts", default="", help="options for the second model")
    p.add_argument("--panel", metavar="GROUP,TIME", help="panel identifiers (required for xtreg)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="bootstrap seed")
    p.add_argument("--json", dest="json_path", metavar="PATH",
                   help="also write the JSON report ('-' for stdout)")
    p.add_argument("--joint-variance", choices=JOINT_VARIANCES, default="sum",
                   help="joint test variance: V1+V2 (default) or the Hausman V1-V2 diagnostic")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress the text report")
    p.add_argument("-v", "--verbose", action="store_true", help="log estimator iterations")
    return p


def parse_model_options(model: str, opts: str, seed: int = DEFAULT_SEED) -> EstimatorSpec:
    """Translate a model name and its option string into an :class:`EstimatorSpec`."""
    model = model.strip().lower()
    if model not in MODEL_NAMES:
        raise UsageError(f"unknown model '{model}'; expected one of {', '.join(MODEL_NAMES)}")
    base = "ols" if model == "reg" else model

    fields: dict = {"seed": seed}
    effects = None
    pos = 0
    opts = opts or ""
    while pos < len(opts):
        if opts[pos:].strip() == "":
            break
        m = _OPTION.match(opts, pos)
        if not m or m.end() == pos:
            raise UsageError(f"malformed option string for {model}: '{opts}'")
        name, value = m.group(1).lower(), m.group(2)
        pos = m.end()
        if name == "nolog":
            if value is not None:
                raise UsageError("nolog takes no argument")
            continue
        if name in ("fe", "re"):
            if base != "xtreg" or value is not None:
                raise UsageError(f"option '{name}' only applies to xtreg")
            effects = name
            continue
        if name not in _VALUE_OPTIONS:
            raise UsageError(f"unknown option '{name}' for {model}")
        target, kind, allowed = _VALUE_OPTIONS[name]
        if base not in allowed:
            raise UsageError(f"option '{name}' does not apply to {model}")
        if value is None or value == "":
            raise UsageError(f"option '{name}' needs a value, e.g. {name}(...)")
        fields[target] = _convert(name, value, kind)

    if base == "xtreg":
        kind = effects or "re"
    elif base == "sqreg":
        kind = "qreg_bootstrap"
    else:
        kind = base
    try:
        return EstimatorSpec(kind=kind, **fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _convert(name: str, value: str, kind: str):
    try:
        if kind == "int":
            return int(value)
        x = float(value)
    except ValueError:
        raise UsageError(f"option '{name}' has a non-numeric value '{value}'") from None
    if kind == "quantile" and x >= 1.0:
        x /= 100.0  # q(25) means the 25th percentile
    return x


def parse_args(argv: Sequence[str] | None = None) -> CliInvocation:
    ns = build_parser().parse_args(argv)
    spec1 = parse_model_options(ns.m1, ns.m1_opts, ns.seed)
    spec2 = parse_model_options(ns.m2, ns.m2_opts, ns.seed)
    panel = None
    if ns.panel is not None:
        parts = [s.strip() for s in ns.panel.split(",")]
        if len(parts) != 2 or not all(parts):
            raise UsageError(f"--panel expects GROUP,TIME, got '{ns.panel}'")
        panel = (parts[0], parts[1])
    uses_xtreg = spec1.needs_panel or spec2.needs_panel
    if uses_xtreg and panel is None:
        raise UsageError("xtreg models need --panel GROUP,TIME")
    if panel is not None and not uses_xtreg:
        raise UsageError("--panel only applies when a model is xtreg")
    return CliInvocation(
        data_path=ns.data,
        depvar=ns.dep,
        indep=tuple(ns.indep),
        if_expr=ns.if_expr,
        in_range=ns.in_range,
        m1=ns.m1,
        m2=ns.m2,
        m1_opts=ns.m1_opts,
        m2_opts=ns.m2_opts,
        spec1=spec1,
        spec2=spec2,
        panel=panel,
        seed=ns.seed,
        json_path=ns.json_path,
        joint_variance=ns.joint_variance,
        quiet=ns.quiet,
    )


def run(inv: CliInvocation):
    ds = load_csv(resolve_data_path(inv.data_path))
    if inv.panel is not None:
        ds = set_panel(ds, *inv.panel)
    row_filter = None
    if inv.if_expr or inv.in_range:
        row_filter = parse_filter(inv.if_expr, inv.in_range)
    return run_biastest(
        ds, inv.depvar, inv.indep, row_filter, inv.spec1, inv.spec2, inv.joint_variance
    )


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if any(a in ("-v", "--verbose") for a in argv):
        logging.basicConfig(level=logging.DEBUG, format="%(name)s: %(message)s")
    try:
        inv = parse_args(argv)
        report = run(inv)
    except UsageError as exc:
        print(f"paramcmp: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"paramcmp: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EstimationError as exc:
        print(f"paramcmp: estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE

    if not inv.quiet:
        sys.stdout.write(render_text(report))
    if inv.json_path:
        payload = render_json(report)
        if inv.json_path == "-":
            sys.stdout.write(payload.decode("utf-8"))
        else:
            Path(inv.json_path).write_bytes(payload)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
