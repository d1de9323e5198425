"""Typed tabular data: schemas, CSV ingestion, summary statistics,
correlation analysis, and threshold binarization.

A Dataset stores columns, not rows. Discrete columns hold integer state
codes (-1 marks a missing cell), continuous columns hold float64 (NaN
marks a missing cell). Datasets are immutable; operations that change
data return new values.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cpd import VariableSpec
from .errors import (
    HeaderMismatchError,
    InsufficientDataError,
    IoError,
    NotContinuousError,
    OutOfRangeValueError,
    ParseError,
    SchemaFormatError,
    ZeroVarianceError,
)

MISSING_CODE = -1


@dataclass(frozen=True)
class ColumnSchema:
    """Column declaration: discrete with ordered states, or continuous.

    ``role`` is free-form metadata (for example "physiological",
    "demographic", "mental-state"); it never affects computation.
    """

    name: str
    states: tuple[str, ...] | None = None
    role: str = ""

    def __post_init__(self):
        if not self.name:
            raise SchemaFormatError("column name must be non-empty")
        if self.states is not None:
            states = tuple(str(s) for s in self.states)
            if len(states) < 2:
                raise SchemaFormatError(
                    f"{self.name!r}: discrete column needs >= 2 states"
                )
            if len(set(states)) != len(states):
                raise SchemaFormatError(f"{self.name!r}: duplicate state labels")
            object.__setattr__(self, "states", states)

    @property
    def is_discrete(self) -> bool:
        return self.states is not None

    def to_spec(self) -> VariableSpec:
        return VariableSpec(self.name, self.states)


def specs_from_schema(schema: Sequence[ColumnSchema]) -> list[VariableSpec]:
    return [col.to_spec() for col in schema]


def schema_from_specs(
    specs: Sequence[VariableSpec], roles: Mapping[str, str] | None = None
) -> list[ColumnSchema]:
    roles = roles or {}
    return [ColumnSchema(s.name, s.states, roles.get(s.name, "")) for s in specs]


class Dataset:
    """Immutable typed table.

    Parameters
    ----------
    schema : sequence of ColumnSchema
        Column declarations, in column order.
    columns : mapping of name -> array
        Internal representation: integer state codes for discrete columns
        (-1 for missing), floats for continuous columns (NaN for missing).
        All arrays must share one length.
    provenance : str
        Free-text note on where the data came from.
    """

    def __init__(
        self,
        schema: Sequence[ColumnSchema],
        columns: Mapping[str, np.ndarray],
        provenance: str = "",
    ):
        self.schema = tuple(schema)
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise SchemaFormatError("duplicate column names in schema")
        if set(columns) != set(names):
            raise SchemaFormatError(
                f"columns {sorted(columns)} do not match schema {names}"
            )
        self._by_name = {c.name: c for c in self.schema}
        self._columns: dict[str, np.ndarray] = {}
        n_rows = None
        for col in self.schema:
            if col.is_discrete:
                arr = np.asarray(columns[col.name], dtype=np.int64)
                top = arr.max(initial=MISSING_CODE)
                low = arr.min(initial=MISSING_CODE)
                if top >= len(col.states) or low < MISSING_CODE:
                    raise SchemaFormatError(
                        f"{col.name!r}: state code out of range for "
                        f"{len(col.states)} states"
                    )
            else:
                arr = np.asarray(columns[col.name], dtype=np.float64)
            if arr.ndim != 1:
                raise SchemaFormatError(f"{col.name!r}: column must be 1-d")
            if n_rows is None:
                n_rows = arr.shape[0]
            elif arr.shape[0] != n_rows:
                raise SchemaFormatError(
                    f"{col.name!r}: length {arr.shape[0]} != {n_rows}"
                )
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            self._columns[col.name] = arr
        self.n_rows = int(n_rows or 0)
        self.provenance = provenance

    # -- construction ---------------------------------------------------

    @classmethod
    def from_labels(
        cls,
        schema: Sequence[ColumnSchema],
        columns: Mapping[str, Sequence],
        provenance: str = "",
    ) -> "Dataset":
        """Build from label/value sequences; None marks a missing cell."""
        coded: dict[str, np.ndarray] = {}
        for col in schema:
            raw = columns[col.name]
            if col.is_discrete:
                index = {s: i for i, s in enumerate(col.states)}
                codes = np.empty(len(raw), dtype=np.int64)
                for i, value in enumerate(raw):
                    if value is None:
                        codes[i] = MISSING_CODE
                    else:
                        try:
                            codes[i] = index[str(value)]
                        except KeyError:
                            raise ParseError(
                                i + 1,
                                col.name,
                                f"unknown state {value!r}, expected one of "
                                f"{col.states}",
                            ) from None
                coded[col.name] = codes
            else:
                coded[col.name] = np.array(
                    [np.nan if v is None else float(v) for v in raw],
                    dtype=np.float64,
                )
        return cls(schema, coded, provenance)

    # -- access -----------------------------------------------------------

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.schema)

    def column_schema(self, name: str) -> ColumnSchema:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaFormatError(f"no column named {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        """Raw column array (codes for discrete, floats for continuous)."""
        self.column_schema(name)
        return self._columns[name]

    def labels(self, name: str) -> list[str | None]:
        """Discrete column decoded back to state labels (None if missing)."""
        col = self.column_schema(name)
        if not col.is_discrete:
            raise NotContinuousError(f"{name!r} is continuous, has no labels")
        return [
            None if code == MISSING_CODE else col.states[code]
            for code in self._columns[name]
        ]

    def missing_mask(self, name: str) -> np.ndarray:
        col = self.column_schema(name)
        arr = self._columns[name]
        return (arr == MISSING_CODE) if col.is_discrete else np.isnan(arr)

    def missing_counts(self) -> dict[str, int]:
        return {
            c.name: int(self.missing_mask(c.name).sum()) for c in self.schema
        }

    def __len__(self) -> int:
        return self.n_rows

    def __eq__(self, other) -> bool:
        # Provenance is a note, not data: it does not affect equality.
        return (
            isinstance(other, Dataset)
            and self.schema == other.schema
            and all(
                np.array_equal(
                    self._columns[n], other._columns[n], equal_nan=True
                )
                for n in self.column_names
            )
        )

    def __repr__(self) -> str:
        return f"Dataset({self.n_rows} rows, {len(self.schema)} columns)"


# -- CSV ------------------------------------------------------------------


def _read_csv(
    handle,
    schema: Sequence[ColumnSchema],
    delimiter: str,
    missing_token: str,
    source: str,
) -> Dataset:
    schema = list(schema)
    reader = csv.reader(handle, delimiter=delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise HeaderMismatchError(f"{source}: empty input, header expected") from None
    expected = [c.name for c in schema]
    if [h.strip() for h in header] != expected:
        raise HeaderMismatchError(
            f"{source}: header {header} does not match schema columns {expected}"
        )
    raw_columns: list[list] = [[] for _ in schema]
    for row_idx, record in enumerate(reader, start=1):
        if len(record) != len(schema):
            raise ParseError(
                row_idx,
                schema[min(len(record), len(schema)) - 1].name,
                f"expected {len(schema)} cells, got {len(record)}",
            )
        for col, cell, bucket in zip(schema, record, raw_columns):
            cell = cell.strip()
            if cell == missing_token:
                bucket.append(None)
            elif col.is_discrete:
                if cell not in col.states:
                    raise ParseError(
                        row_idx,
                        col.name,
                        f"unknown state {cell!r}, expected one of {col.states}",
                    )
                bucket.append(cell)
            else:
                try:
                    bucket.append(float(cell))
                except ValueError:
                    raise ParseError(
                        row_idx, col.name, f"not a number: {cell!r}"
                    ) from None
    columns = {col.name: bucket for col, bucket in zip(schema, raw_columns)}
    return Dataset.from_labels(schema, columns, provenance=f"loaded from {source}")


def load_csv(
    path,
    schema: Sequence[ColumnSchema],
    *,
    delimiter: str = ",",
    missing_token: str = "",
) -> Dataset:
    """Read a UTF-8 CSV with a header row into a Dataset.

    The header must list exactly the schema's column names in order.
    Cells equal to ``missing_token`` become missing markers; rows with
    missing cells are retained. ParseError reports the 1-based data row
    (header excluded) and the column name.
    """
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    with handle:
        return _read_csv(handle, schema, delimiter, missing_token, str(path))


def load_csv_text(
    text: str,
    schema: Sequence[ColumnSchema],
    *,
    delimiter: str = ",",
    missing_token: str = "",
) -> Dataset:
    """load_csv on in-memory CSV text (same parsing and errors)."""
    return _read_csv(
        io.StringIO(text, newline=""), schema, delimiter, missing_token, "<text>"
    )


def _write_csv(data: Dataset, handle, delimiter: str, missing_token: str) -> None:
    writer = csv.writer(handle, delimiter=delimiter)
    writer.writerow(data.column_names)
    decoded = []
    for col in data.schema:
        arr = data.column(col.name)
        if col.is_discrete:
            decoded.append(
                [
                    missing_token if code == MISSING_CODE else col.states[code]
                    for code in arr
                ]
            )
        else:
            decoded.append(
                [missing_token if np.isnan(v) else repr(float(v)) for v in arr]
            )
    for row in zip(*decoded) if decoded else []:
        writer.writerow(row)


def save_csv(
    data: Dataset, path, *, delimiter: str = ",", missing_token: str = ""
) -> None:
    """Write a Dataset as UTF-8 CSV with full-precision floats (repr),
    so that load_csv(save_csv(d)) reproduces d exactly."""
    try:
        handle = open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    with handle:
        _write_csv(data, handle, delimiter, missing_token)


def csv_text(
    data: Dataset, *, delimiter: str = ",", missing_token: str = ""
) -> str:
    """save_csv rendered to a string."""
    buffer = io.StringIO(newline="")
    _write_csv(data, buffer, delimiter, missing_token)
    return buffer.getvalue()


# -- schema files ----------------------------------------------------------

SCHEMA_FORMAT = "clgnet-schema"


def schema_to_dict(schema: Sequence[ColumnSchema]) -> dict:
    return {
        "format": SCHEMA_FORMAT,
        "columns": [
            {
                "name": c.name,
                "kind": "discrete" if c.is_discrete else "continuous",
                **({"states": list(c.states)} if c.is_discrete else {}),
                **({"role": c.role} if c.role else {}),
            }
            for c in schema
        ],
    }


def schema_from_dict(payload: dict) -> list[ColumnSchema]:
    if not isinstance(payload, dict) or payload.get("format") != SCHEMA_FORMAT:
        raise SchemaFormatError(f"not a {SCHEMA_FORMAT} document")
    columns = []
    for entry in payload.get("columns", []):
        kind = entry.get("kind")
        if kind == "discrete":
            states = tuple(entry.get("states", ()))
        elif kind == "continuous":
            states = None
            if "states" in entry:
                raise SchemaFormatError(
                    f"{entry.get('name')!r}: continuous column lists states"
                )
        else:
            raise SchemaFormatError(f"unknown column kind {kind!r}")
        columns.append(
            ColumnSchema(entry.get("name", ""), states, entry.get("role", ""))
        )
    names = [c.name for c in columns]
    if len(set(names)) != len(names):
        raise SchemaFormatError("duplicate column names in schema")
    return columns


def save_schema(schema: Sequence[ColumnSchema], path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(schema_to_dict(schema), handle, indent=2)
            handle.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_schema(path) -> list[ColumnSchema]:
    try:
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaFormatError(f"{path}: invalid JSON: {exc}") from exc
    return schema_from_dict(payload)


# -- statistics -------------------------------------------------------------


@dataclass(frozen=True)
class ContinuousStats:
    name: str
    n: int
    n_missing: int
    minimum: float | None
    maximum: float | None
    mean: float | None
    median: float | None


@dataclass(frozen=True)
class DiscreteStats:
    name: str
    n: int
    n_missing: int
    counts: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class SummaryStats:
    continuous: tuple[ContinuousStats, ...] = ()
    discrete: tuple[DiscreteStats, ...] = ()


def summarize(data: Dataset) -> SummaryStats:
    """Per-column descriptive statistics over non-missing cells.

    The median of an even-length column is the mean of the two central
    order statistics. Empty columns report absent (None) statistics.
    """
    cont, disc = [], []
    for col in data.schema:
        arr = data.column(col.name)
        if col.is_discrete:
            present = arr[arr != MISSING_CODE]
            counts = tuple(
                (state, int(np.sum(present == i)))
                for i, state in enumerate(col.states)
            )
            disc.append(
                DiscreteStats(
                    col.name, int(present.size), data.n_rows - int(present.size),
                    counts,
                )
            )
        else:
            present = arr[~np.isnan(arr)]
            if present.size == 0:
                cont.append(
                    ContinuousStats(col.name, 0, data.n_rows, None, None, None, None)
                )
            else:
                cont.append(
                    ContinuousStats(
                        col.name,
                        int(present.size),
                        data.n_rows - int(present.size),
                        float(present.min()),
                        float(present.max()),
                        float(present.mean()),
                        float(np.median(present)),
                    )
                )
    return SummaryStats(tuple(cont), tuple(disc))


@dataclass(frozen=True)
class CorrelationResult:
    columns: tuple[str, ...]
    matrix: np.ndarray = field(compare=False)
    pair_counts: np.ndarray = field(compare=False)


def correlation_matrix(
    data: Dataset, columns: Sequence[str] | None = None
) -> CorrelationResult:
    """Pairwise-complete Pearson correlations between continuous columns.

    Each pair uses the rows where both cells are present; per-pair row
    counts are returned alongside. Diagonal entries are exactly 1.
    """
    if columns is None:
        columns = [c.name for c in data.schema if not c.is_discrete]
    columns = list(columns)
    for name in columns:
        if data.column_schema(name).is_discrete:
            raise NotContinuousError(f"{name!r} is discrete")
    k = len(columns)
    matrix = np.eye(k)
    counts = np.empty((k, k), dtype=np.int64)
    arrays = [data.column(name) for name in columns]
    for i in range(k):
        counts[i, i] = int((~np.isnan(arrays[i])).sum())
    for i in range(k):
        for j in range(i + 1, k):
            both = ~np.isnan(arrays[i]) & ~np.isnan(arrays[j])
            n_pair = int(both.sum())
            counts[i, j] = counts[j, i] = n_pair
            if n_pair < 2:
                raise InsufficientDataError(
                    f"pair ({columns[i]}, {columns[j]}): {n_pair} complete "
                    f"rows, need >= 2"
                )
            x = arrays[i][both]
            y = arrays[j][both]
            dx = x - x.mean()
            dy = y - y.mean()
            sx = float(np.sqrt((dx * dx).sum()))
            sy = float(np.sqrt((dy * dy).sum()))
            if sx == 0.0 or sy == 0.0:
                raise ZeroVarianceError(
                    f"pair ({columns[i]}, {columns[j]}): constant column"
                )
            matrix[i, j] = matrix[j, i] = float((dx * dy).sum()) / (sx * sy)
    matrix.setflags(write=False)
    counts.setflags(write=False)
    return CorrelationResult(tuple(columns), matrix, counts)


# -- binarization ------------------------------------------------------------


def binarize(data: Dataset, column: str, threshold: float = 50.0) -> Dataset:
    """Replace a continuous 0-100 column with a binary discrete one.

    The new column has states ("0", "1") with 1 iff value >= threshold
    (closed lower bound). Values outside [0, 100] are rejected; missing
    cells stay missing. The original range is recorded in provenance.
    """
    col = data.column_schema(column)
    if col.is_discrete:
        raise NotContinuousError(f"{column!r} is already discrete")
    arr = data.column(column)
    present = ~np.isnan(arr)
    if present.any():
        lo, hi = float(arr[present].min()), float(arr[present].max())
        if lo < 0.0 or hi > 100.0:
            raise OutOfRangeValueError(
                f"{column!r}: values span [{lo:g}, {hi:g}], expected [0, 100]"
            )
        range_note = f"observed range [{lo:g}, {hi:g}]"
    else:
        range_note = "no observed values"
    with np.errstate(invalid="ignore"):  # NaN cells are masked out below
        codes = np.where(present, (arr >= threshold).astype(np.int64), MISSING_CODE)
    new_schema = [
        ColumnSchema(c.name, ("0", "1"), c.role) if c.name == column else c
        for c in data.schema
    ]
    new_columns = {
        c.name: (codes if c.name == column else data.column(c.name))
        for c in data.schema
    }
    note = (
        f"binarized {column!r} at threshold {threshold:g} "
        f"(1 iff value >= threshold; {range_note})"
    )
    provenance = f"{data.provenance}; {note}" if data.provenance else note
    return Dataset(new_schema, new_columns, provenance)


# -- rendering ---------------------------------------------------------------


def render_summary(stats: SummaryStats) -> str:
    """Aligned plain-text statistics report."""
    lines = []
    if stats.continuous:
        rows = [["column", "n", "missing", "min", "max", "mean", "median"]]
        for s in stats.continuous:
            if s.n == 0:
                rows.append([s.name, "0", str(s.n_missing), "-", "-", "-", "-"])
            else:
                rows.append(
                    [
                        s.name,
                        str(s.n),
                        str(s.n_missing),
                        f"{s.minimum:.3f}",
                        f"{s.maximum:.3f}",
                        f"{s.mean:.3f}",
                        f"{s.median:.3f}",
                    ]
                )
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        for r in rows:
            lines.append(
                "  ".join(cell.rjust(w) for cell, w in zip(r, widths)).rstrip()
            )
    if stats.discrete:
        if lines:
            lines.append("")
        for s in stats.discrete:
            parts = ", ".join(f"{state}: {count}" for state, count in s.counts)
            missing = f", missing: {s.n_missing}" if s.n_missing else ""
            lines.append(f"{s.name} (n={s.n}): {parts}{missing}")
    return "\n".join(lines)


def render_correlation(result: CorrelationResult, decimals: int = 3) -> str:
    """Symmetric correlation table, one row and column per variable."""
    names = result.columns
    width = max((len(n) for n in names), default=0)
    width = max(width, decimals + 3)
    header = " " * width + "  " + "  ".join(n.rjust(width) for n in names)
    lines = [header.rstrip()]
    for i, name in enumerate(names):
        cells = "  ".join(
            f"{result.matrix[i, j]:.{decimals}f}".rjust(width)
            for j in range(len(names))
        )
        lines.append(f"{name.rjust(width)}  {cells}".rstrip())
    return "\n".join(lines)
