"""Tabular data loading, row selection and panel indexing."""

from __future__ import annotations

import csv
import math
import operator
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CsvParseError, DataError, FilterError, PanelError, SchemaError

__all__ = [
    "MISSING_TOKENS",
    "Dataset",
    "Panel",
    "ModelFrame",
    "Comparison",
    "RowFilter",
    "load_csv",
    "parse_filter",
    "build_frame",
    "set_panel",
    "fixtures_dir",
    "resolve_data_path",
]

MISSING_TOKENS = frozenset({"", ".", "na"})
CONSTANT = "_cons"


def _is_missing(token: str) -> bool:
    return token.strip().lower() in MISSING_TOKENS


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Panel:
    group_var: str
    time_var: str


@dataclass(frozen=True)
class Dataset:
    """Named columns of equal length.

    Numeric columns are float64 arrays with NaN marking missing cells.
    Non-numeric columns are kept as tuples of strings in ``labels`` and may
    only serve as panel group identifiers.
    """

    columns: Mapping[str, np.ndarray]
    labels: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    panel: Panel | None = None

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()} | {
            len(v) for v in self.labels.values()
        }
        if len(lengths) > 1:
            raise SchemaError(f"columns have unequal lengths {sorted(lengths)}")
        overlap = set(self.columns) & set(self.labels)
        if overlap:
            raise SchemaError(f"duplicate column names {sorted(overlap)}")
        for name in self.names:
            if not name:
                raise SchemaError("column names must be nonempty")

    @classmethod
    def from_columns(
        cls,
        columns: Mapping[str, Iterable[float]],
        labels: Mapping[str, Iterable[str]] | None = None,
    ) -> "Dataset":
        """Build a dataset from plain Python or numpy columns (missing = NaN/None)."""
        numeric = {}
        for name, values in columns.items():
            arr = np.array(
                [math.nan if v is None else float(v) for v in values], dtype=float
            )
            numeric[name] = _readonly(arr)
        text = {name: tuple(str(v) for v in vals) for name, vals in (labels or {}).items()}
        return cls(columns=numeric, labels=text)

    @property
    def names(self) -> list[str]:
        return list(self.columns) + list(self.labels)

    @property
    def n_rows(self) -> int:
        for v in self.columns.values():
            return len(v)
        for v in self.labels.values():
            return len(v)
        return 0

    def missing(self, name: str) -> np.ndarray:
        """Boolean mask of missing cells in a numeric column."""
        return np.isnan(self.numeric(name))

    def numeric(self, name: str) -> np.ndarray:
        if name in self.columns:
            return self.columns[name]
        if name in self.labels:
            raise DataError(f"variable '{name}' is not numeric")
        raise DataError(f"variable '{name}' not found")

    def keys(self, name: str) -> list:
        """Values of a column usable as group/time identifiers."""
        if name in self.labels:
            return list(self.labels[name])
        values = self.numeric(name)
        return [None if math.isnan(v) else float(v) for v in values]

    def group_index(self) -> np.ndarray:
        """Integer group code per row (first-appearance order); requires a panel."""
        if self.panel is None:
            raise PanelError("no panel structure set; use set_panel first")
        codes: dict = {}
        out = np.empty(self.n_rows, dtype=np.intp)
        for i, key in enumerate(self.keys(self.panel.group_var)):
            out[i] = codes.setdefault(key, len(codes))
        return out

    @property
    def n_groups(self) -> int:
        return len(set(self.keys(self.panel.group_var))) if self.panel else 0

    def take(self, rows: Sequence[int]) -> "Dataset":
        """Sub-dataset of the given 0-based rows, in the given order."""
        idx = np.asarray(rows, dtype=np.intp)
        return Dataset(
            columns={k: _readonly(v[idx].copy()) for k, v in self.columns.items()},
            labels={k: tuple(v[i] for i in idx) for k, v in self.labels.items()},
            panel=self.panel,
        )


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def load_csv(path: str | os.PathLike) -> Dataset:
    """Read a header-first CSV file.

    Empty cells, ``.`` and ``NA`` (any case) are missing. A column whose
    non-missing cells all parse as numbers becomes numeric; anything else is
    kept as text labels.
    """
    path = Path(path)
    try:
        handle = open(path, newline="", encoding="utf-8-sig")
    except FileNotFoundError as exc:
        raise DataError(f"data file not found: {path}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError("file is empty; a header row is required", row=1)
        except csv.Error as exc:
            raise CsvParseError(str(exc), row=1) from exc
        header = [h.strip() for h in header]
        if any(not h for h in header):
            raise SchemaError("header contains an empty column name")
        seen = set()
        for h in header:
            if h in seen:
                raise SchemaError(f"duplicate column name '{h}' in header")
            seen.add(h)

        rows = []
        try:
            for record in reader:
                line = reader.line_num
                if not record:
                    continue
                if len(record) != len(header):
                    raise CsvParseError(
                        f"expected {len(header)} fields, found {len(record)}", row=line
                    )
                rows.append(record)
        except csv.Error as exc:
            raise CsvParseError(str(exc), row=reader.line_num) from exc

    columns: dict[str, np.ndarray] = {}
    labels: dict[str, tuple[str, ...]] = {}
    for j, name in enumerate(header):
        cells = [r[j] for r in rows]
        parsed = _parse_numeric(cells)
        if parsed is None:
            labels[name] = tuple(c.strip() for c in cells)
        else:
            columns[name] = _readonly(parsed)
    ordered_cols = {h: columns[h] for h in header if h in columns}
    ordered_labels = {h: labels[h] for h in header if h in labels}
    return Dataset(columns=ordered_cols, labels=ordered_labels)


def _parse_numeric(cells: list[str]) -> np.ndarray | None:
    out = np.empty(len(cells), dtype=float)
    for i, cell in enumerate(cells):
        if _is_missing(cell):
            out[i] = math.nan
            continue
        try:
            out[i] = float(cell)
        except ValueError:
            return None
    return out


def fixtures_dir() -> Path:
    """Directory holding the bundled CSV fixtures (``PARAMCMP_FIXTURES`` overrides)."""
    env = os.environ.get("PARAMCMP_FIXTURES")
    if env:
        return Path(env)
    return Path(__file__).resolve().parents[2] / "fixtures"


def resolve_data_path(name: str | os.PathLike) -> Path:
    """Return ``name`` if it exists, else look it up in the fixtures directory."""
    path = Path(name)
    if path.exists():
        return path
    candidate = fixtures_dir() / path.name
    if candidate.exists():
        return candidate
    raise DataError(f"data file not found: {name}")


# ---------------------------------------------------------------------------
# row filters
# ---------------------------------------------------------------------------

_OPS = {
    "==": operator.eq,
    "!=": operator.ne,
    "<=": operator.le,
    ">=": operator.ge,
    "<": operator.lt,
    ">": operator.gt,
}
_CLAUSE = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*(==|!=|<=|>=|<|>)\s*(\S+)\s*$")


@dataclass(frozen=True)
class Comparison:
    variable: str
    op: str
    value: float

    def evaluate(self, column: np.ndarray) -> np.ndarray:
        # A missing cell never satisfies a comparison.
        with np.errstate(invalid="ignore"):
            hit = _OPS[self.op](column, self.value)
        return hit & ~np.isnan(column)


@dataclass(frozen=True)
class RowFilter:
    """Conjunction of ``var OP const`` clauses and/or a 1-based inclusive row range."""

    clauses: tuple[Comparison, ...] = ()
    in_range: tuple[int, int] | None = None

    def mask(self, ds: Dataset) -> np.ndarray:
        keep = np.ones(ds.n_rows, dtype=bool)
        if self.in_range is not None:
            first, last = self.in_range
            if not 1 <= first <= last <= ds.n_rows:
                raise FilterError(
                    f"in-range {first},{last} outside 1..{ds.n_rows}"
                )
            rng = np.zeros(ds.n_rows, dtype=bool)
            rng[first - 1:last] = True
            keep &= rng
        for clause in self.clauses:
            try:
                column = ds.numeric(clause.variable)
            except DataError as exc:
                raise FilterError(f"filter: {exc}") from exc
            keep &= clause.evaluate(column)
        return keep


def parse_filter(expression: str | None = None, in_range: str | tuple[int, int] | None = None) -> RowFilter:
    """Parse ``"x > 1 & y == 2"`` and ``"first,last"`` into a :class:`RowFilter`."""
    clauses = []
    if expression is not None and expression.strip():
        for part in expression.split("&"):
            m = _CLAUSE.match(part)
            if not m:
                raise FilterError(f"cannot parse filter clause '{part.strip()}'")
            var, op, const = m.groups()
            try:
                value = float(const)
            except ValueError:
                raise FilterError(f"filter constant '{const}' is not a number") from None
            clauses.append(Comparison(var, op, value))
    rng = None
    if in_range is not None:
        if isinstance(in_range, str):
            try:
                first, last = (int(p) for p in in_range.split(","))
            except ValueError:
                raise FilterError(f"in-range must be 'first,last', got '{in_range}'") from None
        else:
            first, last = in_range
        if not 1 <= first <= last:
            raise FilterError(f"in-range requires 1 <= first <= last, got {first},{last}")
        rng = (first, last)
    return RowFilter(tuple(clauses), rng)


# ---------------------------------------------------------------------------
# model frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelFrame:
    """Complete-case response and design matrix; the last column of X is the constant."""

    depvar: str
    indep: tuple[str, ...]
    y: np.ndarray
    X: np.ndarray
    row_origin: tuple[int, ...]

    @property
    def names(self) -> list[str]:
        return [*self.indep, CONSTANT]

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def k(self) -> int:
        return len(self.indep)

    def subset(self, rows: np.ndarray) -> "ModelFrame":
        """Frame restricted to 0-based positions ``rows`` (no validity checks)."""
        rows = np.asarray(rows, dtype=np.intp)
        return ModelFrame(
            depvar=self.depvar,
            indep=self.indep,
            y=_readonly(self.y[rows].copy()),
            X=_readonly(self.X[rows].copy()),
            row_origin=tuple(self.row_origin[i] for i in rows),
        )


def build_frame(
    ds: Dataset,
    depvar: str,
    indep: Sequence[str],
    filter: RowFilter | None = None,
) -> ModelFrame:
    """Select variables, apply the filter and drop incomplete rows."""
    indep = tuple(indep)
    if not indep:
        raise DataError("at least one independent variable is required")
    if depvar in indep:
        raise DataError(f"'{depvar}' is both the dependent and an independent variable")
    if len(set(indep)) != len(indep):
        raise DataError("independent variables must be distinct")
    if CONSTANT in indep or depvar == CONSTANT:
        raise DataError(f"'{CONSTANT}' is reserved for the intercept")

    y = ds.numeric(depvar)
    cols = [ds.numeric(v) for v in indep]
    keep = filter.mask(ds) if filter is not None else np.ones(ds.n_rows, dtype=bool)
    keep &= ~np.isnan(y)
    for c in cols:
        keep &= ~np.isnan(c)
    rows = np.flatnonzero(keep)
    if rows.size == 0:
        raise DataError("no observations remain after filtering and listwise deletion")
    k = len(indep)
    if rows.size <= k + 1:
        raise DataError(
            f"insufficient observations: n={rows.size} with {k + 1} parameters"
        )
    X = np.column_stack([c[rows] for c in cols] + [np.ones(rows.size)])
    return ModelFrame(
        depvar=depvar,
        indep=indep,
        y=_readonly(y[rows].copy()),
        X=_readonly(X),
        row_origin=tuple(int(i) + 1 for i in rows),
    )


def set_panel(ds: Dataset, group: str, time: str) -> Dataset:
    """Attach a (group, time) panel index; pairs must be unique."""
    for name in (group, time):
        if name not in ds.columns and name not in ds.labels:
            raise PanelError(f"panel variable '{name}' not found")
    groups = ds.keys(group)
    times = ds.keys(time)
    seen: dict = {}
    for i, pair in enumerate(zip(groups, times)):
        if None in pair:
            raise PanelError(f"row {i + 1}: missing panel identifier")
        if pair in seen:
            raise PanelError(
                f"duplicate panel key ({group}={_fmt_key(pair[0])}, "
                f"{time}={_fmt_key(pair[1])}) at rows {seen[pair] + 1} and {i + 1}"
            )
        seen[pair] = i
    return Dataset(columns=ds.columns, labels=ds.labels, panel=Panel(group, time))


def _fmt_key(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)
