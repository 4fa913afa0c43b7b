"""
Descriptive statistics with SPSS-compatible definitions.

Sample variance uses the n-1 denominator, skewness is the bias-adjusted
G1 estimator, and quantiles default to the weighted average at (n+1)p
(SPSS ``HAVERAGE``, Hyndman-Fan type 6).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import InsufficientDataError

__all__ = [
    "DescriptiveSummary",
    "Histogram",
    "BoxplotStats",
    "quantile",
    "summarize",
    "trimmed_mean",
    "mode",
    "histogram",
    "boxplot_stats",
    "se_mean",
    "se_skewness",
    "QUANTILE_RULES",
]

QUANTILE_RULES = ("haverage", "tukey_hinges")


def _clean(values) -> np.ndarray:
    x = np.asarray(values, dtype=float).ravel()
    return x[~np.isnan(x)]


def quantile(values, p: float, rule: str = "haverage") -> float:
    """
    Sample quantile of ``values`` at probability ``p``.

    ``haverage`` interpolates between order statistics at position (n+1)p,
    clamped to the sample extremes. ``tukey_hinges`` returns Tukey's hinges
    for p = 0.25 / 0.75 (the median of each half, the middle value shared
    when n is odd) and falls back to ``haverage`` for other p.
    """
    x = np.sort(_clean(values))
    n = x.size
    if n == 0:
        raise InsufficientDataError("quantile of an empty sample")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if rule == "tukey_hinges" and p in (0.25, 0.75):
        half = (n + 1) // 2
        part = x[:half] if p == 0.25 else x[n - half:]
        return float(np.median(part))
    if rule not in QUANTILE_RULES:
        raise ValueError(f"unknown quantile rule {rule!r}")
    h = (n + 1) * p
    if h <= 1:
        return float(x[0])
    if h >= n:
        return float(x[-1])
    lo = int(math.floor(h))
    frac = h - lo
    return float(x[lo - 1] + frac * (x[lo] - x[lo - 1]))


def se_mean(sd: float, n: int) -> float:
    return sd / math.sqrt(n)


def se_skewness(n: int) -> float:
    """Standard error of G1 for a sample of size n (n >= 3)."""
    if n < 3:
        raise InsufficientDataError("standard error of skewness needs n >= 3")
    return math.sqrt(6.0 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)))


def trimmed_mean(values, fraction: float = 0.05) -> float:
    """
    Mean after removing ``floor(n * fraction)`` values from each end.

    Raises
    ------
    InsufficientDataError
        If nothing remains after trimming.
    """
    if not 0.0 <= fraction <= 0.25:
        raise ValueError(f"trim fraction must lie in [0, 0.25], got {fraction}")
    x = np.sort(_clean(values))
    n = x.size
    k = int(math.floor(n * fraction))
    if n - 2 * k < 1:
        raise InsufficientDataError("no values left after trimming")
    return float(np.mean(x[k:n - k]))


def mode(values) -> float:
    """Most frequent value; the smallest wins a tie."""
    x = _clean(values)
    if x.size == 0:
        raise InsufficientDataError("mode of an empty sample")
    uniq, counts = np.unique(x, return_counts=True)
    return float(uniq[np.argmax(counts)])


@dataclass(frozen=True)
class DescriptiveSummary:
    n: int
    n_missing: int
    mean: float
    se_mean: float
    median: float
    mode: float
    sd: float
    variance: float
    skewness: Optional[float]
    se_skewness: Optional[float]
    range: float
    min: float
    max: float
    trimmed_mean: float

    def as_dict(self) -> dict:
        return asdict(self)


def summarize(values, trim: float = 0.05) -> DescriptiveSummary:
    """
    Table of descriptive statistics for one variable.

    Parameters
    ----------
    values : array_like
        Observations; NaN (or None) entries count as missing.
    trim : float
        Fraction cut from each end for the trimmed mean.

    Returns
    -------
    DescriptiveSummary
        Skewness is None for constant data or fewer than three values.
    """
    raw = np.asarray([math.nan if v is None else v for v in values], dtype=float).ravel()
    x = raw[~np.isnan(raw)]
    n = int(x.size)
    if n < 2:
        raise InsufficientDataError(f"need at least 2 valid values, got {n}")
    lo, hi = float(x.min()), float(x.max())
    mean = float(np.mean(x))
    if lo == hi:
        mean, var = lo, 0.0
        m2 = m3 = 0.0
    else:
        d = x - mean
        # moments of d / max|d| keep tiny or huge spreads representable
        scale = float(np.max(np.abs(d)))
        u = d / scale
        m2 = float(np.mean(u * u))
        m3 = float(np.mean(u * u * u))
        var = m2 * n / (n - 1) * scale * scale
    sd = math.sqrt(var)
    skew = None
    if n >= 3 and m2 > 0:
        skew = math.sqrt(n * (n - 1)) / (n - 2) * m3 / m2 ** 1.5
    return DescriptiveSummary(
        n=n,
        n_missing=int(raw.size - n),
        mean=mean,
        se_mean=se_mean(sd, n),
        median=float(np.median(x)),
        mode=mode(x),
        sd=sd,
        variance=var,
        skewness=skew,
        se_skewness=se_skewness(n) if n >= 3 else None,
        range=hi - lo,
        min=lo,
        max=hi,
        trimmed_mean=trimmed_mean(x, trim),
    )


# -- distribution summaries --------------------------------------------------

@dataclass(frozen=True)
class Histogram:
    bin_edges: tuple
    counts: tuple
    overlay: Optional[tuple] = None  # (mean, sd) of the normal curve

    @property
    def n(self) -> int:
        return int(sum(self.counts))

    def as_dict(self) -> dict:
        return {"bin_edges": list(self.bin_edges), "counts": list(self.counts),
                "overlay": None if self.overlay is None else
                {"mean": self.overlay[0], "sd": self.overlay[1]}}


def _bin_count(x: np.ndarray, bins: Union[int, str]) -> int:
    n = x.size
    if isinstance(bins, (int, np.integer)):
        if bins < 1:
            raise ValueError("bin count must be positive")
        return int(bins)
    if bins == "sturges":
        return int(math.ceil(math.log2(n))) + 1 if n > 1 else 1
    if bins == "fd":
        iqr = quantile(x, 0.75) - quantile(x, 0.25)
        if iqr <= 0:
            return _bin_count(x, "sturges")
        width = 2.0 * iqr * n ** (-1.0 / 3.0)
        return max(1, int(math.ceil((x.max() - x.min()) / width)))
    raise ValueError(f"unknown binning rule {bins!r}")


def histogram(values, bins: Union[int, str] = "sturges") -> Histogram:
    """Equal-width histogram over [min, max]; bins are right-open except the last."""
    x = _clean(values)
    if x.size == 0:
        raise InsufficientDataError("histogram of an empty sample")
    lo, hi = float(x.min()), float(x.max())
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    overlay = (float(np.mean(x)), sd)
    if lo == hi:
        return Histogram((lo, hi), (int(x.size),), overlay)
    k = _bin_count(x, bins)
    edges = np.linspace(lo, hi, k + 1)
    counts, _ = np.histogram(x, bins=edges)
    return Histogram(tuple(float(e) for e in edges), tuple(int(c) for c in counts), overlay)


@dataclass(frozen=True)
class BoxplotStats:
    q1: float
    median: float
    q3: float
    iqr: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple = field(default_factory=tuple)  # (row, value), beyond 1.5 IQR
    extremes: tuple = field(default_factory=tuple)  # (row, value), beyond 3 IQR

    def as_dict(self) -> dict:
        d = asdict(self)
        d["outliers"] = [list(o) for o in self.outliers]
        d["extremes"] = [list(o) for o in self.extremes]
        return d


def boxplot_stats(values: Sequence[float], rule: str = "haverage") -> BoxplotStats:
    """Box, whiskers and outlier classification (1.5 and 3 IQR fences)."""
    x = np.asarray(values, dtype=float).ravel()
    valid = ~np.isnan(x)
    if valid.sum() < 4:
        raise InsufficientDataError("boxplot needs at least 4 values")
    q1 = quantile(x, 0.25, rule)
    med = quantile(x, 0.5, rule)
    q3 = quantile(x, 0.75, rule)
    iqr = q3 - q1
    inner_lo, inner_hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    outer_lo, outer_hi = q1 - 3.0 * iqr, q3 + 3.0 * iqr
    inside = x[valid & (x >= inner_lo) & (x <= inner_hi)]
    outliers, extremes = [], []
    for i in np.flatnonzero(valid):
        v = float(x[i])
        if v < inner_lo or v > inner_hi:
            outliers.append((int(i), v))
            if v < outer_lo or v > outer_hi:
                extremes.append((int(i), v))
    return BoxplotStats(
        q1=q1, median=med, q3=q3, iqr=iqr,
        whisker_lo=float(inside.min()), whisker_hi=float(inside.max()),
        outliers=tuple(outliers), extremes=tuple(extremes),
    )
