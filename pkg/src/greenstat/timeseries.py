"""
Dataset model, CSV ingestion, range validation and cleaning.

A :class:`Dataset` is an immutable table of timestamped numeric columns.
Missing cells are stored as NaN; arrays are marked read-only on
construction so that every operation below is a pure function.
"""

from __future__ import annotations

import csv
import io
import math
import operator
import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import BinaryIO, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .errors import ParseError, SchemaError, ValidationError

__all__ = [
    "Variable",
    "Dataset",
    "RangeSpec",
    "CleaningReport",
    "OutlierRule",
    "Comparison",
    "DEFAULT_SCHEMA",
    "DEFAULT_RANGES",
    "TIMESTAMP",
    "load_csv",
    "read_csv",
    "write_csv",
    "to_csv_bytes",
    "validate_ranges",
    "clean",
    "filter_rows",
    "parse_predicate",
    "parse_outlier_rule",
]

TIMESTAMP = "timestamp"
UNITS = ("°C", "%", "W/m²", "mg/m³", "km/h", "kW")
ROLES = ("weather", "generation", "load")


@dataclass(frozen=True)
class Variable:
    name: str
    unit: str
    role: str
    label: str = ""

    def __post_init__(self):
        if self.unit not in UNITS:
            raise SchemaError(f"unsupported unit {self.unit!r} for {self.name!r}")
        if self.role not in ROLES:
            raise SchemaError(f"unsupported role {self.role!r} for {self.name!r}")
        if not self.label:
            object.__setattr__(self, "label", self.name)


DEFAULT_SCHEMA = (
    Variable("temperature_c", "°C", "weather", "Temperature (°C)"),
    Variable("relative_humidity_pct", "%", "weather", "Relative Humidity (%)"),
    Variable("irradiance_wm2", "W/m²", "weather", "Irradiance (W/m2)"),
    Variable("dust_mgm3", "mg/m³", "weather", "Dust (mg/m3)"),
    Variable("wind_speed_kmh", "km/h", "weather", "Wind Speed (km/h)"),
    Variable("pv_kw", "kW", "generation", "PV (kW)"),
    Variable("load_kw", "kW", "load", "Load (kW)"),
)


@dataclass(frozen=True)
class Dataset:
    """
    Immutable table of aligned numeric columns.

    Parameters
    ----------
    timestamps : tuple of datetime
        Strictly increasing observation instants.
    variables : tuple of Variable
        Column descriptors, in schema order.
    columns : mapping of str to ndarray
        One float array per variable; NaN marks a missing value.
    """

    timestamps: tuple
    variables: tuple
    columns: Mapping[str, np.ndarray]

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SchemaError("variable names must be unique")
        if set(names) != set(self.columns):
            raise SchemaError("columns do not match the variable list")
        n = len(self.timestamps)
        frozen = {}
        for name in names:
            arr = np.array(self.columns[name], dtype=float)
            if arr.shape != (n,):
                raise ValidationError(
                    f"column {name!r} has {arr.size} entries, expected {n}")
            arr.flags.writeable = False
            frozen[name] = arr
        for i in range(1, n):
            if not self.timestamps[i - 1] < self.timestamps[i]:
                raise ValidationError(
                    f"timestamps not strictly increasing at row {i}: "
                    f"{self.timestamps[i - 1]} then {self.timestamps[i]}")
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "columns", frozen)

    @property
    def row_count(self) -> int:
        return len(self.timestamps)

    @property
    def names(self) -> list:
        return [v.name for v in self.variables]

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise ValidationError(f"unknown variable {name!r}")

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise ValidationError(f"unknown variable {name!r}") from None

    def take(self, mask_or_index) -> "Dataset":
        """Sub-dataset of the selected rows, order preserved."""
        idx = np.arange(self.row_count)[np.asarray(mask_or_index)]
        return Dataset(
            timestamps=tuple(self.timestamps[i] for i in idx),
            variables=self.variables,
            columns={k: v[idx] for k, v in self.columns.items()},
        )

    def missing_mask(self) -> np.ndarray:
        mask = np.zeros(self.row_count, dtype=bool)
        for arr in self.columns.values():
            mask |= np.isnan(arr)
        return mask

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.timestamps == other.timestamps
                and self.variables == other.variables
                and all(np.array_equal(self.columns[k], other.columns[k], equal_nan=True)
                        for k in self.names))

    __hash__ = None


# -- ingestion ---------------------------------------------------------------

def _parse_float(token: str) -> float:
    token = token.strip()
    if not token:
        return math.nan
    try:
        value = float(token)
    except ValueError:
        return math.nan
    return value if math.isfinite(value) else math.nan


def load_csv(source: Union[BinaryIO, bytes], schema: Sequence[Variable] = DEFAULT_SCHEMA) -> Dataset:
    """
    Parse a UTF-8 CSV byte stream into a :class:`Dataset`.

    Empty cells and non-numeric tokens become missing values. Rows are
    sorted by timestamp after parsing.

    Raises
    ------
    SchemaError
        Header missing a schema variable or the timestamp column, or naming
        a column the schema does not know.
    ParseError
        A row with the wrong number of fields or an unreadable timestamp.
    ValidationError
        Duplicate timestamps.
    """
    raw = source if isinstance(source, (bytes, bytearray)) else source.read()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SchemaError("empty input: no header row") from None

    expected = [TIMESTAMP] + [v.name for v in schema]
    missing = [h for h in expected if h not in header]
    unknown = [h for h in header if h not in expected]
    if missing:
        raise SchemaError(f"header lacks column(s): {', '.join(missing)}")
    if unknown:
        raise SchemaError(f"header has unknown column(s): {', '.join(unknown)}")
    if len(set(header)) != len(header):
        raise SchemaError("header repeats a column name")
    pos = {h: i for i, h in enumerate(header)}

    stamps = []
    values = {v.name: [] for v in schema}
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(row)}", line)
        try:
            stamps.append(datetime.fromisoformat(row[pos[TIMESTAMP]].strip()))
        except ValueError:
            raise ParseError(f"bad timestamp {row[pos[TIMESTAMP]]!r}", line) from None
        for v in schema:
            values[v.name].append(_parse_float(row[pos[v.name]]))

    order = sorted(range(len(stamps)), key=stamps.__getitem__)
    sorted_stamps = [stamps[i] for i in order]
    for a, b in zip(sorted_stamps, sorted_stamps[1:]):
        if a == b:
            raise ValidationError(f"duplicate timestamp {a.isoformat()}")
    return Dataset(
        timestamps=tuple(sorted_stamps),
        variables=tuple(schema),
        columns={k: np.asarray(v, dtype=float)[order] if v else np.empty(0)
                 for k, v in values.items()},
    )


def read_csv(path, schema: Sequence[Variable] = DEFAULT_SCHEMA) -> Dataset:
    with open(path, "rb") as fh:
        return load_csv(fh, schema)


def _format_value(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def to_csv_bytes(d: Dataset) -> bytes:
    """Serialize with the canonical header; floats use shortest round-trip repr."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([TIMESTAMP] + d.names)
    cols = [d.columns[n] for n in d.names]
    for i, ts in enumerate(d.timestamps):
        writer.writerow([ts.isoformat()] + [_format_value(c[i]) for c in cols])
    return buf.getvalue().encode("utf-8")


def write_csv(d: Dataset, path) -> None:
    with open(path, "wb") as fh:
        fh.write(to_csv_bytes(d))


# -- validation and cleaning -------------------------------------------------

@dataclass(frozen=True)
class RangeSpec:
    """Closed admissible interval per variable."""

    bounds: Mapping[str, tuple]

    def __post_init__(self):
        for name, (lo, hi) in self.bounds.items():
            if not lo <= hi:
                raise ValidationError(f"range for {name!r} has lo > hi: [{lo}, {hi}]")
        object.__setattr__(self, "bounds", dict(self.bounds))

    def __getitem__(self, name):
        return self.bounds[name]

    def covers(self, names: Iterable[str]) -> list:
        return [n for n in names if n not in self.bounds]


DEFAULT_RANGES = RangeSpec({
    "temperature_c": (-10.0, 60.0),
    "relative_humidity_pct": (0.0, 100.0),
    "irradiance_wm2": (0.0, 1500.0),
    "dust_mgm3": (0.0, 5.0),
    "wind_speed_kmh": (0.0, 150.0),
    "pv_kw": (0.0, 40.0),
    "load_kw": (0.0, 80.0),
})


@dataclass(frozen=True)
class OutlierRule:
    """Tukey fence multiplier; ``k=None`` disables outlier removal."""

    k: Optional[float] = 1.5

    def __post_init__(self):
        if self.k is not None and not self.k > 0:
            raise ValidationError(f"tukey multiplier must be positive, got {self.k}")

    def __str__(self):
        return "none" if self.k is None else f"tukey:{self.k:g}"


def parse_outlier_rule(text: str) -> OutlierRule:
    text = text.strip().lower()
    if text == "none":
        return OutlierRule(None)
    m = re.fullmatch(r"tukey(?:[:(]\s*([0-9.eE+-]+)\s*\)?)?", text)
    if not m:
        raise ValidationError(f"unrecognised outlier rule {text!r}")
    try:
        return OutlierRule(float(m.group(1)) if m.group(1) else 1.5)
    except ValueError:
        raise ValidationError(f"unrecognised outlier rule {text!r}") from None


@dataclass
class CleaningReport:
    rows_in: int = 0
    rows_out: int = 0
    dropped_missing: int = 0
    dropped_out_of_range: int = 0
    dropped_outlier: int = 0
    # per variable: cell counts flagged at each stage (a row may be counted
    # under several variables)
    per_variable: dict = field(default_factory=dict)
    empty: bool = False

    def as_dict(self) -> dict:
        return {
            "rows_in": self.rows_in,
            "rows_out": self.rows_out,
            "dropped_missing": self.dropped_missing,
            "dropped_out_of_range": self.dropped_out_of_range,
            "dropped_outlier": self.dropped_outlier,
            "empty": self.empty,
            "per_variable": self.per_variable,
        }


def validate_ranges(d: Dataset, spec: RangeSpec = DEFAULT_RANGES) -> list:
    """Return ``(row, variable, value)`` for every cell strictly outside its interval."""
    uncovered = spec.covers(d.names)
    if uncovered:
        raise ValidationError(f"range spec lacks variable(s): {', '.join(uncovered)}")
    out = []
    for row in range(d.row_count):
        for name in d.names:
            x = d.columns[name][row]
            lo, hi = spec[name]
            if not math.isnan(x) and (x < lo or x > hi):
                out.append((row, name, float(x)))
    return out


def clean(d: Dataset, spec: RangeSpec = DEFAULT_RANGES,
          outlier_rule: OutlierRule = OutlierRule(1.5)):
    """
    Listwise cleaning: drop rows with missing cells, then out-of-range cells,
    then Tukey outliers computed per variable on the surviving rows.

    Returns
    -------
    (Dataset, CleaningReport)
    """
    from .descriptive import quantile

    uncovered = spec.covers(d.names)
    if uncovered:
        raise ValidationError(f"range spec lacks variable(s): {', '.join(uncovered)}")
    report = CleaningReport(rows_in=d.row_count)
    per_var = {n: {"missing": 0, "out_of_range": 0, "outlier": 0} for n in d.names}

    keep = np.ones(d.row_count, dtype=bool)
    stage = np.zeros(d.row_count, dtype=bool)
    for name in d.names:
        bad = np.isnan(d.columns[name])
        per_var[name]["missing"] = int(bad.sum())
        stage |= bad
    report.dropped_missing = int(stage.sum())
    keep &= ~stage

    stage = np.zeros(d.row_count, dtype=bool)
    for name in d.names:
        x = d.columns[name]
        lo, hi = spec[name]
        with np.errstate(invalid="ignore"):
            bad = keep & ((x < lo) | (x > hi))
        per_var[name]["out_of_range"] = int(bad.sum())
        stage |= bad
    report.dropped_out_of_range = int(stage.sum())
    keep &= ~stage

    if outlier_rule.k is not None and keep.sum() >= 1:
        k = outlier_rule.k
        stage = np.zeros(d.row_count, dtype=bool)
        for name in d.names:
            x = d.columns[name]
            live = x[keep]
            q1, q3 = quantile(live, 0.25), quantile(live, 0.75)
            iqr = q3 - q1
            bad = keep & ((x < q1 - k * iqr) | (x > q3 + k * iqr))
            per_var[name]["outlier"] = int(bad.sum())
            stage |= bad
        report.dropped_outlier = int(stage.sum())
        keep &= ~stage

    out = d.take(keep)
    report.rows_out = out.row_count
    report.per_variable = per_var
    report.empty = out.row_count == 0
    return out, report


# -- row filters -------------------------------------------------------------

_OPS = {
    ">": operator.gt, ">=": operator.ge, "<": operator.lt,
    "<=": operator.le, "==": operator.eq, "!=": operator.ne,
}


@dataclass(frozen=True)
class Comparison:
    variable: str
    op: str
    value: float

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValidationError(f"unsupported comparison operator {self.op!r}")

    def __str__(self):
        return f"{self.variable}{self.op}{self.value:g}"


def parse_predicate(text: str) -> list:
    """Parse ``"irradiance_wm2>0, pv_kw<=30"`` into a list of comparisons."""
    out = []
    for part in filter(None, (p.strip() for p in re.split(r"[,;]|\band\b", text))):
        m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*(>=|<=|==|!=|>|<)\s*(\S+)", part)
        if not m:
            raise ValidationError(f"cannot parse filter {part!r}")
        try:
            value = float(m.group(3))
        except ValueError:
            raise ValidationError(f"non-numeric threshold in filter {part!r}") from None
        out.append(Comparison(m.group(1), m.group(2), value))
    return out


def filter_rows(d: Dataset, predicate) -> Dataset:
    """
    Keep rows satisfying every comparison. ``predicate`` may be a string,
    a single :class:`Comparison` or a sequence of them. Missing cells never
    satisfy a comparison.
    """
    if isinstance(predicate, str):
        predicate = parse_predicate(predicate)
    elif isinstance(predicate, Comparison):
        predicate = [predicate]
    mask = np.ones(d.row_count, dtype=bool)
    for cmp in predicate:
        x = d.column(cmp.variable)
        with np.errstate(invalid="ignore"):
            mask &= _OPS[cmp.op](x, cmp.value) & ~np.isnan(x)
    return d.take(mask)
