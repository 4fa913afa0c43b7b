"""
Figure files written next to the tabular report: histograms with a normal
overlay, boxplots, scatter plots against the response and residual plots.

Figures are drawn on an Agg canvas without touching pyplot state.
"""

from __future__ import annotations

import functools
import math
from pathlib import Path
from typing import Sequence

import matplotlib as mpl
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .descriptive import boxplot_stats, histogram
from .regression import OlsFit
from .timeseries import Dataset

__all__ = [
    "STYLE",
    "histogram_figure",
    "boxplot_figure",
    "scatter_figure",
    "residual_figure",
    "write_figures",
]

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
}
WIDTH = 4.8
GOLDEN = (math.sqrt(5) - 1.0) / 2.0
# no timestamp / version metadata, so identical inputs give identical files
_PNG_META = {"Software": None}


def _new(ncols: int = 1, width: float = WIDTH):
    fig = Figure(figsize=(width * ncols, width * GOLDEN), dpi=120)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    return path


def _styled(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        with mpl.rc_context(STYLE):
            return func(*args, **kwargs)
    return wrapper


@_styled
def histogram_figure(values, label: str, path, bins="sturges") -> Path:
    """Frequency histogram with the fitted normal curve scaled to counts."""
    h = histogram(values, bins)
    fig = _new()
    ax = fig.add_subplot(1, 1, 1)
    edges = np.asarray(h.bin_edges)
    ax.hist(np.asarray(values, dtype=float), bins=edges, color="#9ecae1", edgecolor="#3182bd")
    mean, sd = h.overlay
    if sd > 0 and edges.size > 1:
        width = edges[1] - edges[0]
        xs = np.linspace(edges[0], edges[-1], 200)
        ys = h.n * width * np.exp(-0.5 * ((xs - mean) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
        ax.plot(xs, ys, color="#d62728", lw=1.2)
    ax.set_xlabel(label)
    ax.set_ylabel("Frequency")
    ax.set_title(f"Mean = {mean:.2f}, Std. Dev. = {sd:.3f}, N = {h.n}")
    return _save(fig, Path(path))


@_styled
def boxplot_figure(d: Dataset, variables: Sequence[str], path) -> Path:
    """One box per variable; whiskers and outliers follow boxplot_stats."""
    fig = _new(ncols=max(1, len(variables)) / 2.0 + 0.5)
    axes = fig.subplots(1, len(variables), squeeze=False)[0]
    for ax, v in zip(axes, variables):
        b = boxplot_stats(d.column(v))
        ax.bxp([{
            "med": b.median, "q1": b.q1, "q3": b.q3,
            "whislo": b.whisker_lo, "whishi": b.whisker_hi,
            "fliers": [val for _, val in b.outliers], "label": "",
        }], showfliers=True)
        ax.set_title(d.variable(v).label)
    return _save(fig, Path(path))


@_styled
def scatter_figure(d: Dataset, response: str, predictors: Sequence[str], path) -> Path:
    fig = _new(ncols=len(predictors) / 1.5 + 0.5)
    axes = fig.subplots(1, len(predictors), squeeze=False)[0]
    y = d.column(response)
    for ax, v in zip(axes, predictors):
        ax.scatter(d.column(v), y, s=2, alpha=0.3, color="#3182bd", rasterized=True)
        ax.set_xlabel(d.variable(v).label)
        ax.set_ylabel(d.variable(response).label)
    return _save(fig, Path(path))


@_styled
def residual_figure(fit: OlsFit, label: str, path) -> Path:
    fig = _new()
    ax = fig.add_subplot(1, 1, 1)
    z_pred = (fit.fitted - fit.fitted.mean()) / np.std(fit.fitted, ddof=1)
    z_res = fit.residuals / fit.see
    ax.scatter(z_pred, z_res, s=2, alpha=0.3, color="#636363", rasterized=True)
    ax.axhline(0.0, color="#d62728", lw=0.8)
    ax.set_xlabel("Std. Predicted Value")
    ax.set_ylabel("Std. Residual")
    ax.set_title(f"Dependent Variable: {label}")
    return _save(fig, Path(path))


def write_figures(d: Dataset, directory, variables: Sequence[str], fits=(), bins="sturges") -> list:
    """Write the full figure set for a report into ``directory``; returns paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for v in variables:
        out.append(histogram_figure(d.column(v), d.variable(v).label,
                                    directory / f"histogram_{v}.png", bins))
    out.append(boxplot_figure(d, variables, directory / "boxplots.png"))
    for fit in fits:
        out.append(scatter_figure(d, fit.response, fit.predictors,
                                  directory / f"scatter_{fit.response}.png"))
        out.append(residual_figure(fit, d.variable(fit.response).label,
                                   directory / f"residuals_{fit.response}.png"))
    return out
