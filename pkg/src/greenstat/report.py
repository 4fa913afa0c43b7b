"""
Report model and SPSS-style table rendering.

A :class:`Report` is an ordered list of :class:`Table` sections. Cells keep
their raw values; formatting is applied only by the text and CSV
renderers, so JSON output carries the analysis-layer numbers unchanged.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import descriptive as ds
from . import inference as inf
from . import regression as rg
from .specfun import format_p
from .timeseries import CleaningReport, Dataset

__all__ = [
    "Cell",
    "Table",
    "Report",
    "spss_number",
    "cleaning_table",
    "descriptive_table",
    "boxplot_table",
    "histogram_tables",
    "levene_table",
    "anova_table",
    "correlation_table",
    "model_summary_table",
    "coefficients_table",
    "residuals_table",
    "prediction_table",
    "DESCRIPTIVE_ROWS",
]

ABSENT = "—"


def spss_number(x, decimals: int = 3) -> str:
    """Fixed decimals with the leading zero dropped: 0.711 -> '.711'."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{decimals}f}"
    if s.startswith("0."):
        s = s[1:]
    elif s.startswith("-0."):
        s = "-" + s[2:]
    if s.startswith("-") and set(s[1:]) <= {"0", "."}:
        s = s[1:]
    return s


@dataclass(frozen=True)
class Cell:
    """A raw value plus the format used when it is rendered as text.

    ``fmt`` is ``"text"``, ``"int"``, ``"p"`` (significance), ``"df"``
    (integer unless fractional) or ``"fN"`` for N decimals. ``suffix`` is
    appended verbatim (significance stars).
    """

    value: Any
    fmt: str = "text"
    suffix: str = ""
    absent: str = ""

    def text(self) -> str:
        v = self.value
        if v is None:
            return self.absent
        if self.fmt == "text":
            s = str(v)
        elif self.fmt == "int":
            s = str(int(v))
        elif self.fmt == "p":
            s = format_p(v)
        elif self.fmt == "df":
            s = str(int(v)) if float(v).is_integer() else spss_number(v, 3)
        elif self.fmt.startswith("f"):
            s = spss_number(v, int(self.fmt[1:]))
        else:
            raise ValueError(f"unknown cell format {self.fmt!r}")
        return s + self.suffix

    def raw(self):
        v = self.value
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
        return v


def _cell(v) -> Cell:
    return v if isinstance(v, Cell) else Cell(v)


@dataclass
class Table:
    title: str
    headers: list
    rows: list  # list of lists of Cell (or plain values, coerced to text cells)
    footnotes: list = field(default_factory=list)
    key: str = ""

    def text_rows(self) -> list:
        return [[_cell(c).text() for c in row] for row in self.rows]

    def render_text(self) -> str:
        body = self.text_rows()
        header = [str(h) for h in self.headers]
        ncol = max([len(header)] + [len(r) for r in body])
        header += [""] * (ncol - len(header))
        body = [r + [""] * (ncol - len(r)) for r in body]
        widths = [max(len(r[i]) for r in [header] + body) for i in range(ncol)]

        def line(cells):
            parts = []
            for i, c in enumerate(cells):
                parts.append(c.ljust(widths[i]) if i == 0 else c.rjust(widths[i]))
            return "  ".join(parts).rstrip()

        rule = "-" * len(line(["x" * w for w in widths]))
        out = [self.title, rule, line(header), rule]
        out += [line(r) for r in body]
        out.append(rule)
        out += list(self.footnotes)
        return "\n".join(out) + "\n"

    def render_csv(self) -> str:
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.headers)
        writer.writerows(self.text_rows())
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "title": self.title,
            "key": self.key,
            "headers": list(self.headers),
            "rows": [[_cell(c).raw() for c in row] for row in self.rows],
            "footnotes": list(self.footnotes),
        }


@dataclass
class Report:
    tables: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, table: Table, key: Optional[str] = None, data=None) -> None:
        if key:
            table.key = key
        self.tables.append(table)
        if key and data is not None:
            self.data[key] = data

    def extend(self, other: "Report") -> None:
        self.tables.extend(other.tables)
        self.data.update(other.data)

    def render_text(self) -> str:
        return "\n".join(t.render_text() for t in self.tables)

    def render_json(self) -> str:
        doc = {"tables": [t.as_dict() for t in self.tables], "results": self.data}
        return json.dumps(_strict(doc), indent=2, ensure_ascii=False, allow_nan=False,
                          default=_json_default) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.render_json()
        if fmt == "text":
            return self.render_text()
        raise ValueError(f"unknown output format {fmt!r}")


def _strict(obj):
    # strict JSON has no NaN or Infinity: NaN -> null, +-inf -> "inf" / "-inf"
    if isinstance(obj, dict):
        return {k: _strict(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_strict(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _strict(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    return obj


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _label(d: Optional[Dataset], name: str) -> str:
    if d is None:
        return name
    try:
        return d.variable(name).label
    except Exception:
        return name


# -- section builders --------------------------------------------------------

def cleaning_table(report: CleaningReport) -> Table:
    rows = [
        ["Rows read", Cell(report.rows_in, "int")],
        ["Dropped: missing value", Cell(report.dropped_missing, "int")],
        ["Dropped: out of range", Cell(report.dropped_out_of_range, "int")],
        ["Dropped: outlier", Cell(report.dropped_outlier, "int")],
        ["Rows retained", Cell(report.rows_out, "int")],
    ]
    notes = ["Empty result: every row was dropped."] if report.empty else []
    return Table("Data Cleaning", ["Stage", "Rows"], rows, notes)


DESCRIPTIVE_ROWS = (
    ("N Valid", "n", "int"),
    ("Missing", "n_missing", "int"),
    ("Mean", "mean", "f4"),
    ("Std. Error of Mean", "se_mean", "f5"),
    ("Median", "median", "f4"),
    ("Mode", "mode", "f3"),
    ("Std. Deviation", "sd", "f5"),
    ("Variance", "variance", "f3"),
    ("Skewness", "skewness", "f3"),
    ("Std. Error of Skewness", "se_skewness", "f3"),
    ("Range", "range", "f2"),
    ("Minimum", "min", "f2"),
    ("Maximum", "max", "f2"),
    ("Trimmed Mean", "trimmed_mean", "f4"),
)


def descriptive_table(d: Dataset, variables: Sequence[str], trim: float = 0.05):
    summaries = {v: ds.summarize(d.column(v), trim) for v in variables}
    rows = []
    for label, attr, fmt in DESCRIPTIVE_ROWS:
        rows.append([label] + [Cell(getattr(summaries[v], attr), fmt, absent=ABSENT)
                               for v in variables])
    table = Table("Statistics", [""] + [_label(d, v) for v in variables], rows,
                  [f"Trimmed mean discards the top and bottom {trim:.0%} of cases."])
    return table, {v: s.as_dict() for v, s in summaries.items()}


def boxplot_table(d: Dataset, variables: Sequence[str]):
    stats = {v: ds.boxplot_stats(d.column(v)) for v in variables}
    rows = []
    for v in variables:
        b = stats[v]
        rows.append([_label(d, v), Cell(b.q1, "f3"), Cell(b.median, "f3"), Cell(b.q3, "f3"),
                     Cell(b.iqr, "f3"), Cell(b.whisker_lo, "f3"), Cell(b.whisker_hi, "f3"),
                     Cell(len(b.outliers), "int"), Cell(len(b.extremes), "int")])
    table = Table("Boxplot Summary",
                  ["", "Q1", "Median", "Q3", "IQR", "Lower Whisker", "Upper Whisker",
                   "Outliers", "Extremes"], rows,
                  ["Quartiles by the (n+1)p weighted average; outliers beyond 1.5 IQR, "
                   "extremes beyond 3 IQR from the box."])
    return table, {v: b.as_dict() for v, b in stats.items()}


def histogram_tables(d: Dataset, variables: Sequence[str], bins="sturges"):
    tables, data = [], {}
    for v in variables:
        h = ds.histogram(d.column(v), bins)
        rows = [[Cell(lo, "f3"), Cell(hi, "f3"), Cell(c, "int")]
                for lo, hi, c in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts)]
        mean, sd = h.overlay
        tables.append(Table(f"Histogram: {_label(d, v)}", ["From", "To", "Frequency"], rows,
                            [f"Normal curve: Mean = {spss_number(mean, 4)}, "
                             f"Std. Dev. = {spss_number(sd, 4)}, N = {h.n}"]))
        data[v] = h.as_dict()
    return tables, data


def levene_table(d: Dataset, variables: Sequence[str], scheme):
    rows, data = [], {}
    for v in variables:
        g = inf.make_groups(d, v, scheme)
        data[v] = []
        for i, variant in enumerate(inf.LEVENE_VARIANTS):
            res = inf.levene(g, variant)
            data[v].append(res.as_dict())
            rows.append([_label(d, v) if i == 0 else "", inf.LEVENE_LABELS[variant],
                         Cell(res.W, "f3"), Cell(res.df1, "int"), Cell(res.df2, "df"),
                         Cell(res.p, "p")])
    table = Table("Test of Homogeneity of Variances",
                  ["", "", "Levene Statistic", "df1", "df2", "Sig."], rows,
                  [f"Grouping: {scheme}."])
    return table, data


def anova_table(d: Dataset, variables: Sequence[str], scheme):
    rows, data = [], {}
    for v in variables:
        res = inf.anova_oneway(inf.make_groups(d, v, scheme))
        data[v] = res.as_dict()
        ms_b = res.ss_between / res.df1
        ms_w = res.ss_within / res.df2
        rows.append([_label(d, v), "Between Groups", Cell(res.ss_between, "f3"),
                     Cell(res.df1, "int"), Cell(ms_b, "f3"), Cell(res.F, "f3"), Cell(res.p, "p")])
        rows.append(["", "Within Groups", Cell(res.ss_within, "f3"), Cell(res.df2, "int"),
                     Cell(ms_w, "f3"), "", ""])
        rows.append(["", "Total", Cell(res.ss_total, "f3"), Cell(res.df1 + res.df2, "int"),
                     "", "", ""])
    table = Table("ANOVA", ["", "", "Sum of Squares", "df", "Mean Square", "F", "Sig."],
                  rows, [f"Grouping: {scheme}."])
    return table, data


def correlation_table(d: Dataset, m: inf.CorrelationMatrix, subset: str = "") -> Table:
    labels = [_label(d, v) for v in m.variables]
    rows, flags = [], set()
    for i, v in enumerate(m.variables):
        r_row = [labels[i], "Pearson Correlation"]
        p_row = ["", "Sig. (2-tailed)"]
        n_row = ["", "N"]
        for j in range(len(m.variables)):
            c = m.cells[i][j]
            if i == j:
                r_row.append(Cell(1, "int"))
                p_row.append("")
            else:
                flag = c.significance_flag
                flags.add(flag)
                r_row.append(Cell(c.r, "f3", suffix=flag))
                p_row.append(Cell(c.p_two_tailed, "p"))
            n_row.append(Cell(c.n, "int"))
        rows += [r_row, p_row, n_row]
    notes = []
    if "**" in flags:
        notes.append("** Correlation is significant at the 0.01 level (2-tailed).")
    if "*" in flags:
        notes.append("* Correlation is significant at the 0.05 level (2-tailed).")
    if subset:
        notes.append(f"Cases selected: {subset}.")
    return Table("Correlations", ["", ""] + labels, rows, notes)


def _letters(i: int) -> str:
    return "abcdefghijklmnopqrstuvwxyz"[i % 26]


def _predictor_notes(d: Dataset, trace: rg.StepwiseTrace) -> list:
    notes = []
    for i in range(len(trace.rows)):
        names = ", ".join(_label(d, v) for v in trace.entered[: i + 1])
        notes.append(f"{_letters(i)}. Predictors: (Constant), {names}")
    return notes


def model_summary_table(d: Dataset, trace: rg.StepwiseTrace) -> Table:
    rows = []
    for i, row in enumerate(rg.model_summary(trace)):
        rows.append([Cell(row.step, "int"), Cell(row.r, "f3", suffix=f" {_letters(i)}"),
                     Cell(row.r2, "f3"), Cell(row.adj_r2, "f3"), Cell(row.see, "f6"),
                     Cell(row.r2_change, "f3"), Cell(row.f_change, "f3"),
                     Cell(row.df1, "int"), Cell(row.df2, "int"), Cell(row.sig_f_change, "p")])
    notes = _predictor_notes(d, trace)
    notes.append(f"{_letters(len(trace.rows))}. Dependent Variable: {_label(d, trace.response)}")
    return Table(f"Model Summary: {_label(d, trace.response)}",
                 ["Model", "R", "R Square", "Adjusted R Square", "Std. Error of the Estimate",
                  "R Square Change", "F Change", "df1", "df2", "Sig. F Change"], rows, notes)


def coefficients_table(d: Dataset, trace: rg.StepwiseTrace) -> Table:
    rows = []
    for step, fit in enumerate(trace.fits, start=1):
        for j, c in enumerate(fit.coefficient_table()):
            term = c["term"] if j == 0 else _label(d, c["term"])
            rows.append([Cell(step, "int") if j == 0 else "", term,
                         Cell(c["B"], "f3"), Cell(c["std_error"], "f3"),
                         Cell(c["beta"], "f3"), Cell(c["t"], "f3"), Cell(c["p"], "p")])
    return Table(f"Coefficients: {_label(d, trace.response)}",
                 ["Model", "", "B", "Std. Error", "Beta", "t", "Sig."], rows,
                 [f"a. Dependent Variable: {_label(d, trace.response)}",
                  "B and Std. Error are unstandardized; Beta is standardized."])


def residuals_table(d: Dataset, fit: rg.OlsFit) -> Table:
    rs = rg.residual_statistics(fit)
    rows = []
    for label, block, fmt in (("Predicted Value", rs.predicted, "f5"),
                              ("Residual", rs.residual, "f6"),
                              ("Std. Predicted Value", rs.std_predicted, "f3"),
                              ("Std. Residual", rs.std_residual, "f3")):
        rows.append([label] + [Cell(x, fmt) for x in block] + [Cell(rs.n, "int")])
    return Table(f"Residuals Statistics: {_label(d, fit.response)}",
                 ["", "Minimum", "Maximum", "Mean", "Std. Deviation", "N"], rows,
                 [f"a. Dependent Variable: {_label(d, fit.response)}"])


def prediction_table(model, inputs: dict, value: float) -> Table:
    rows = [[name, Cell(coef, "f3"), Cell(inputs[name], "f3")]
            for name, coef in model.coefficients.items()]
    rows.insert(0, ["(Constant)", Cell(model.intercept, "f3"), ""])
    rows.append([f"Predicted {model.response}", "", Cell(value, "f3")])
    return Table(f"Prediction: {model.name}", ["Term", "Coefficient", "Input"], rows)
