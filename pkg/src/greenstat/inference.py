"""
Pearson correlation, group construction, Levene's test and one-way ANOVA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .descriptive import trimmed_mean
from .errors import DomainError, GroupingError, InsufficientDataError, UndefinedCorrelationError
from .specfun import f_upper_p, t_two_tailed_p
from .timeseries import Dataset, filter_rows

__all__ = [
    "CorrelationResult",
    "CorrelationMatrix",
    "GroupedSeries",
    "ByColumn",
    "EqualCountBins",
    "LeveneResult",
    "AnovaResult",
    "LEVENE_VARIANTS",
    "pearson",
    "correlation_matrix",
    "make_groups",
    "parse_grouping",
    "levene",
    "anova_oneway",
    "significance_flag",
]

LEVENE_VARIANTS = ("mean", "median", "median_adjusted_df", "trimmed_mean")
LEVENE_LABELS = {
    "mean": "Based on Mean",
    "median": "Based on Median",
    "median_adjusted_df": "Based on Median and with adjusted df",
    "trimmed_mean": "Based on trimmed mean",
}


def significance_flag(p: Optional[float]) -> str:
    if p is None:
        return ""
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def _t_from_r(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return math.copysign(math.inf, r)
    return r * math.sqrt((n - 2) / (1.0 - r * r))


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    p_two_tailed: Optional[float]

    @property
    def t(self) -> float:
        return _t_from_r(self.r, self.n)

    @property
    def significance_flag(self) -> str:
        return significance_flag(self.p_two_tailed)

    def as_dict(self) -> dict:
        return {"r": self.r, "n": self.n, "p_two_tailed": self.p_two_tailed,
                "flag": self.significance_flag}


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """
    Pearson product-moment correlation with a two-tailed t-test of r = 0.

    Raises
    ------
    UndefinedCorrelationError
        If either input has zero variance.
    InsufficientDataError
        On unequal lengths or fewer than three pairs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DomainError(f"inputs differ in length: {x.size} vs {y.size}")
    n = x.size
    if n < 3:
        raise InsufficientDataError(f"correlation needs n >= 3, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0 or np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("correlation undefined: an input has zero variance")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    r = min(1.0, max(-1.0, r))
    p = t_two_tailed_p(_t_from_r(r, n), n - 2).value
    return CorrelationResult(r, n, p)


@dataclass(frozen=True)
class CorrelationMatrix:
    variables: tuple
    cells: tuple  # cells[i][j] is a CorrelationResult; diagonal has p None

    def __getitem__(self, key):
        i, j = key
        if isinstance(i, str):
            i = self.variables.index(i)
        if isinstance(j, str):
            j = self.variables.index(j)
        return self.cells[i][j]

    def as_dict(self) -> dict:
        return {"variables": list(self.variables),
                "cells": [[c.as_dict() for c in row] for row in self.cells]}


def correlation_matrix(d: Dataset, variables: Sequence[str], subset=None) -> CorrelationMatrix:
    """
    Symmetric matrix of pairwise correlations.

    ``subset`` is an optional row predicate (see :func:`filter_rows`). Rows
    with a missing value in either member of a pair are skipped for that pair.
    """
    variables = list(variables)
    if len(variables) < 2:
        raise InsufficientDataError("correlation matrix needs at least two variables")
    if subset:
        d = filter_rows(d, subset)
    cols = {v: d.column(v) for v in variables}
    k = len(variables)
    cells = [[None] * k for _ in range(k)]
    for i, a in enumerate(variables):
        xa = cols[a]
        cells[i][i] = CorrelationResult(1.0, int(np.count_nonzero(~np.isnan(xa))), None)
        for j in range(i + 1, k):
            xb = cols[variables[j]]
            ok = ~(np.isnan(xa) | np.isnan(xb))
            res = pearson(xa[ok], xb[ok])
            cells[i][j] = cells[j][i] = res
    return CorrelationMatrix(tuple(variables), tuple(tuple(r) for r in cells))


# -- groups ------------------------------------------------------------------

@dataclass(frozen=True)
class GroupedSeries:
    groups: tuple  # ((label, ndarray), ...)

    def __post_init__(self):
        if len(self.groups) < 2:
            raise GroupingError(f"need at least 2 groups, got {len(self.groups)}")
        fixed = []
        for label, values in self.groups:
            arr = np.asarray(values, dtype=float)
            if arr.size == 0:
                raise GroupingError(f"group {label!r} is empty")
            arr.flags.writeable = False
            fixed.append((str(label), arr))
        object.__setattr__(self, "groups", tuple(fixed))

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def n_total(self) -> int:
        return sum(v.size for _, v in self.groups)

    @property
    def labels(self) -> list:
        return [label for label, _ in self.groups]

    @property
    def values(self) -> list:
        return [v for _, v in self.groups]

    @classmethod
    def from_lists(cls, *groups) -> "GroupedSeries":
        return cls(tuple((f"G{i + 1}", g) for i, g in enumerate(groups)))


@dataclass(frozen=True)
class ByColumn:
    """One group per distinct value of a column."""
    name: str

    def __str__(self):
        return f"column:{self.name}"


@dataclass(frozen=True)
class EqualCountBins:
    """
    ``k`` groups of (nearly) equal size by rank of ``on``; ``on=None`` ranks
    by row position, i.e. chronological blocks.
    """
    k: int
    on: Optional[str] = None

    def __str__(self):
        return f"bins:{self.k}" + (f":{self.on}" if self.on else "")


def parse_grouping(text: str, k: Optional[int] = None):
    """``rows`` / ``bins[:K[:VAR]]`` / ``column:VAR``; ``k`` overrides K."""
    parts = text.strip().split(":")
    kind = parts[0]
    if kind == "column" and len(parts) == 2:
        return ByColumn(parts[1])
    if kind in ("rows", "bins"):
        kk = int(parts[1]) if len(parts) > 1 and parts[1] else 25
        on = parts[2] if len(parts) > 2 and parts[2] else None
        return EqualCountBins(k if k is not None else kk, on)
    raise GroupingError(f"cannot parse grouping scheme {text!r}")


def make_groups(d: Dataset, variable: str, scheme: Union[ByColumn, EqualCountBins]) -> GroupedSeries:
    """Partition one variable's values into labelled groups."""
    y = d.column(variable)
    if isinstance(scheme, ByColumn):
        g = d.column(scheme.name)
        ok = ~(np.isnan(y) | np.isnan(g))
        levels = np.unique(g[ok])
        groups = tuple((f"{lvl:g}", y[ok & (g == lvl)]) for lvl in levels)
        return GroupedSeries(groups)
    if isinstance(scheme, EqualCountBins):
        k = int(scheme.k)
        if k < 2:
            raise GroupingError(f"need at least 2 groups, got k={k}")
        key = np.arange(d.row_count, dtype=float) if scheme.on is None else d.column(scheme.on)
        ok = ~(np.isnan(y) | np.isnan(key))
        yv, kv = y[ok], key[ok]
        n = yv.size
        if n < k:
            raise GroupingError(f"cannot form {k} groups from {n} values")
        order = np.argsort(kv, kind="stable")
        sorted_key = kv[order]
        bins = (np.arange(n) * k) // n
        # tied keys share the bin of the first member of the run
        for i in range(1, n):
            if sorted_key[i] == sorted_key[i - 1]:
                bins[i] = bins[i - 1]
        assign = np.empty(n, dtype=int)
        assign[order] = bins
        groups = tuple((str(b + 1), yv[assign == b]) for b in range(k))
        return GroupedSeries(groups)
    raise GroupingError(f"unsupported grouping scheme {scheme!r}")


# -- tests -------------------------------------------------------------------

@dataclass(frozen=True)
class LeveneResult:
    variant: str
    W: float
    df1: int
    df2: float
    p: float

    def as_dict(self) -> dict:
        return {"variant": self.variant, "W": self.W, "df1": self.df1,
                "df2": self.df2, "p": self.p}


@dataclass(frozen=True)
class AnovaResult:
    F: float
    df1: int
    df2: int
    p: float
    ss_between: float
    ss_within: float

    @property
    def ss_total(self) -> float:
        return self.ss_between + self.ss_within

    def as_dict(self) -> dict:
        return {"F": self.F, "df1": self.df1, "df2": self.df2, "p": self.p,
                "ss_between": self.ss_between, "ss_within": self.ss_within}


def _sums_of_squares(groups):
    allv = np.concatenate(groups)
    grand = allv.mean()
    means = [g.mean() for g in groups]
    ssb = float(sum(g.size * (m - grand) ** 2 for g, m in zip(groups, means)))
    ssw_parts = [float(np.sum((g - m) ** 2)) for g, m in zip(groups, means)]
    return ssb, ssw_parts


def _f_ratio(ssb, ssw, df1, df2):
    if ssw == 0.0:
        if ssb == 0.0:
            return 0.0, 1.0
        return math.inf, 0.0
    f = (ssb / df1) / (ssw / df2)
    return f, f_upper_p(f, df1, df2).value


def anova_oneway(g: GroupedSeries) -> AnovaResult:
    """
    One-way ANOVA F test of equal group means.

    Zero within-group variation with unequal means gives F = inf, p = 0.
    """
    k, n = g.k, g.n_total
    if n - k < 1:
        raise InsufficientDataError(f"ANOVA needs N - k >= 1 (N={n}, k={k})")
    ssb, parts = _sums_of_squares(g.values)
    ssw = float(sum(parts))
    df1, df2 = k - 1, n - k
    f, p = _f_ratio(ssb, ssw, df1, df2)
    return AnovaResult(f, df1, df2, p, ssb, ssw)


def _center(values: np.ndarray, variant: str) -> float:
    if variant == "mean":
        return float(values.mean())
    if variant in ("median", "median_adjusted_df"):
        return float(np.median(values))
    if variant == "trimmed_mean":
        return trimmed_mean(values, 0.05)
    raise ValueError(f"unknown Levene variant {variant!r}")


def levene(g: GroupedSeries, variant: str = "mean") -> LeveneResult:
    """
    Levene's test of equal variances: an ANOVA on |y - center| per group.

    For ``median_adjusted_df`` the statistic equals the median variant and
    the denominator degrees of freedom use a Satterthwaite approximation
    over the per-group sums of squared deviations of the absolute
    deviations, u_i = sum_j (z_ij - zbar_i)^2:

        df2 = (sum_i u_i)^2 / sum_i (u_i^2 / (n_i - 1))

    Groups of size 1 contribute nothing. By Cauchy-Schwarz df2 <= N - k.
    """
    if variant not in LEVENE_VARIANTS:
        raise ValueError(f"unknown Levene variant {variant!r}; choose from {LEVENE_VARIANTS}")
    if max(v.size for v in g.values) < 2:
        raise InsufficientDataError("Levene's test needs a group with at least 2 values")
    k, n = g.k, g.n_total
    z = [np.abs(v - _center(v, variant)) for v in g.values]
    ssb, parts = _sums_of_squares(z)
    ssw = float(sum(parts))
    df1, df2 = k - 1, n - k
    if variant == "median_adjusted_df":
        den = sum(u * u / (v.size - 1) for u, v in zip(parts, g.values) if v.size > 1)
        if den > 0:
            df2 = ssw * ssw / den
    w, p = _f_ratio(ssb, ssw, df1, n - k)
    if variant == "median_adjusted_df" and math.isfinite(w) and w > 0:
        p = f_upper_p(w, df1, df2).value
    return LeveneResult(variant, w, df1, float(df2) if variant == "median_adjusted_df" else df2, p)
