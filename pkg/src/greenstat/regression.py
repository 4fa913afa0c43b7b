"""
Ordinary least squares and forward stepwise selection.

Fits are computed from a QR factorization of the column-scaled design
matrix (intercept first); the normal equations are never formed.
Summary quantities follow the SPSS "Model Summary", "Coefficients" and
"Residuals Statistics" layouts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    AnalysisError,
    CollinearityError,
    InsufficientDataError,
    MissingInputError,
)
from .specfun import f_upper_p, t_two_tailed_p
from .timeseries import Dataset

__all__ = [
    "OlsFit",
    "ModelSummaryRow",
    "StepwiseTrace",
    "ResidualStats",
    "PublishedModel",
    "CONSTANT",
    "RANK_TOL",
    "ols",
    "ols_fit",
    "stepwise_forward",
    "model_summary",
    "residual_statistics",
    "predict",
    "published_models",
    "get_published_model",
    "adjusted_r2",
    "f_change",
]

CONSTANT = "(Constant)"
RANK_TOL = 1e-10


def adjusted_r2(r2: float, n: int, p: int) -> float:
    """Adjusted R squared for ``p`` predictors plus an intercept."""
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


def f_change(r2_change: float, r2: float, df2: float, df1: int = 1) -> float:
    """F statistic for the R squared increment of ``df1`` added predictors."""
    if r2 >= 1.0:
        return math.inf if r2_change > 0 else 0.0
    return (r2_change / df1) * df2 / (1.0 - r2)


@dataclass(frozen=True, eq=False)
class OlsFit:
    response: str
    predictors: tuple
    b: np.ndarray          # intercept first
    se_b: np.ndarray
    beta: np.ndarray       # standardized; NaN for the intercept
    t_stats: np.ndarray
    p_values: np.ndarray
    r: float
    r2: float
    adj_r2: float
    see: float
    n: int
    residuals: np.ndarray
    fitted: np.ndarray
    y: np.ndarray

    @property
    def p(self) -> int:
        return len(self.predictors)

    @property
    def df_resid(self) -> int:
        return self.n - self.p - 1

    @property
    def intercept(self) -> float:
        return float(self.b[0])

    @property
    def coefficients(self) -> dict:
        return {name: float(v) for name, v in zip(self.predictors, self.b[1:])}

    @property
    def terms(self) -> tuple:
        return (CONSTANT,) + tuple(self.predictors)

    def coefficient_table(self) -> list:
        rows = []
        for i, term in enumerate(self.terms):
            rows.append({
                "term": term,
                "B": float(self.b[i]),
                "std_error": float(self.se_b[i]),
                "beta": None if i == 0 else float(self.beta[i]),
                "t": float(self.t_stats[i]),
                "p": float(self.p_values[i]),
            })
        return rows

    def as_dict(self) -> dict:
        return {
            "response": self.response,
            "predictors": list(self.predictors),
            "coefficients": self.coefficient_table(),
            "R": self.r, "R2": self.r2, "adj_R2": self.adj_r2,
            "see": self.see, "n": self.n,
        }


def _solve_qr(X: np.ndarray, y: np.ndarray, names: Sequence[str]):
    scale = np.linalg.norm(X, axis=0)
    scale[scale == 0] = 1.0
    Xs = X / scale
    q, r = np.linalg.qr(Xs, mode="reduced")
    diag = np.abs(np.diag(r))
    tol = RANK_TOL * diag.max()
    # a small pivot at j means column j lies in the span of the earlier columns
    for j, dj in enumerate(diag):
        if not dj > tol:
            raise CollinearityError(names[j])
    coef_s = solve_triangular(r, q.T @ y, lower=False)
    r_inv = solve_triangular(r, np.eye(r.shape[0]), lower=False)
    # diag((X'X)^-1) = row norms of R^-1, unscaled
    xtx_inv_diag = np.sum(r_inv * r_inv, axis=1) / (scale * scale)
    return coef_s / scale, xtx_inv_diag


def ols(X: np.ndarray, y: np.ndarray, predictors: Sequence[str], response: str = "y") -> OlsFit:
    """
    Least-squares fit of ``y`` on the columns of ``X`` plus an intercept.

    Parameters
    ----------
    X : ndarray, shape (n, p)
        Predictor matrix without the constant column.
    y : ndarray, shape (n,)
    predictors : sequence of str
        Names for the columns of ``X``.

    Raises
    ------
    InsufficientDataError
        If n <= p + 1 or the response is constant.
    CollinearityError
        If the design matrix is rank deficient.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    if len(predictors) != p:
        raise ValueError("one name per predictor column is required")
    if y.size != n:
        raise ValueError("X and y differ in length")
    if n <= p + 1:
        raise InsufficientDataError(f"need n > p + 1 observations (n={n}, p={p})")
    sd_y = float(np.std(y, ddof=1))
    if sd_y == 0.0:
        raise InsufficientDataError("response has zero variance")

    design = np.column_stack([np.ones(n), X])
    b, xtx_inv_diag = _solve_qr(design, y, (CONSTANT,) + tuple(predictors))
    fitted = design @ b
    resid = y - fitted
    df = n - p - 1
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = max(0.0, 1.0 - rss / tss)
    see = math.sqrt(rss / df)
    se_b = np.sqrt(xtx_inv_diag) * see
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se_b > 0, b / np.where(se_b > 0, se_b, 1.0),
                     np.where(b == 0, 0.0, np.copysign(np.inf, b)))
    pv = np.array([t_two_tailed_p(float(ti), df).value for ti in t])
    sd_x = np.std(X, axis=0, ddof=1)
    beta = np.concatenate([[np.nan], b[1:] * sd_x / sd_y])
    return OlsFit(
        response=response,
        predictors=tuple(predictors),
        b=b, se_b=se_b, beta=beta, t_stats=t, p_values=pv,
        r=math.sqrt(r2), r2=r2, adj_r2=adjusted_r2(r2, n, p), see=see, n=n,
        residuals=resid, fitted=fitted, y=y,
    )


def _complete_rows(d: Dataset, names: Sequence[str]) -> np.ndarray:
    mask = np.ones(d.row_count, dtype=bool)
    for name in names:
        mask &= ~np.isnan(d.column(name))
    return mask


def ols_fit(d: Dataset, response: str, predictors: Sequence[str]) -> OlsFit:
    """Fit ``response`` on ``predictors`` using rows complete in all of them."""
    predictors = list(predictors)
    if len(set(predictors)) != len(predictors):
        dup = next(p for p in predictors if predictors.count(p) > 1)
        raise CollinearityError(dup)
    mask = _complete_rows(d, [response] + predictors)
    X = np.column_stack([d.column(p)[mask] for p in predictors]) if predictors \
        else np.empty((int(mask.sum()), 0))
    return ols(X, d.column(response)[mask], predictors, response)


# -- stepwise ----------------------------------------------------------------

@dataclass(frozen=True)
class ModelSummaryRow:
    step: int
    r: float
    r2: float
    adj_r2: float
    see: float
    r2_change: float
    f_change: float
    df1: int
    df2: int
    sig_f_change: float
    entered: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _summary_row(step: int, fit: OlsFit, prev_r2: float, entered: str) -> ModelSummaryRow:
    change = max(0.0, fit.r2 - prev_r2)
    df2 = fit.df_resid
    fc = f_change(change, fit.r2, df2)
    return ModelSummaryRow(
        step=step, r=fit.r, r2=fit.r2, adj_r2=fit.adj_r2, see=fit.see,
        r2_change=change, f_change=fc, df1=1, df2=df2,
        sig_f_change=f_upper_p(fc, 1, df2).value, entered=entered,
    )


@dataclass(frozen=True, eq=False)
class StepwiseTrace:
    response: str
    rows: tuple
    fits: tuple
    excluded: tuple  # ((name, entry p-value at termination), ...)
    p_enter: float = 0.05

    @property
    def final(self) -> Optional[OlsFit]:
        return self.fits[-1] if self.fits else None

    @property
    def entered(self) -> list:
        return [row.entered for row in self.rows]

    @property
    def empty(self) -> bool:
        return not self.rows

    def as_dict(self) -> dict:
        return {
            "response": self.response,
            "p_enter": self.p_enter,
            "entered": self.entered,
            "model_summary": [r.as_dict() for r in self.rows],
            "models": [f.as_dict() for f in self.fits],
            "excluded": [{"variable": v, "p": p} for v, p in self.excluded],
        }


def stepwise_forward(d: Dataset, response: str, candidates: Sequence[str],
                     p_enter: float = 0.05) -> StepwiseTrace:
    """
    Forward selection by the probability of F-to-enter.

    At each step every remaining candidate is tried; the one with the
    smallest Sig. F Change enters if that probability is at most
    ``p_enter``. Ties go to the larger F change, then to candidate order.
    Rows missing any of the variables are excluded up front (listwise).
    A candidate that would make the design rank deficient is given an
    entry probability of 1.
    """
    candidates = list(dict.fromkeys(candidates))
    if not candidates:
        raise AnalysisError("stepwise selection needs at least one candidate")
    if not 0.0 < p_enter < 1.0:
        raise AnalysisError(f"p_enter must lie in (0, 1), got {p_enter}")
    if response in candidates:
        raise AnalysisError(f"response {response!r} cannot also be a candidate")

    mask = _complete_rows(d, [response] + candidates)
    y = d.column(response)[mask]
    cols = {c: d.column(c)[mask] for c in candidates}

    entered: list = []
    rows, fits = [], []
    prev_r2 = 0.0
    remaining = list(candidates)
    last_scores = {}
    while remaining and y.size > len(entered) + 2:
        scores = []
        for order, cand in enumerate(remaining):
            names = entered + [cand]
            try:
                fit = ols(np.column_stack([cols[c] for c in names]), y, names, response)
            except CollinearityError:
                scores.append((1.0, 0.0, order, cand, None))
                continue
            row = _summary_row(len(rows) + 1, fit, prev_r2, cand)
            scores.append((row.sig_f_change, -row.f_change, order, cand, (fit, row)))
        scores.sort(key=lambda s: s[:3])
        last_scores = {s[3]: s[0] for s in scores}
        best = scores[0]
        if best[4] is None or best[0] > p_enter:
            break
        fit, row = best[4]
        entered.append(best[3])
        remaining.remove(best[3])
        rows.append(row)
        fits.append(fit)
        prev_r2 = fit.r2
        last_scores = {}
    excluded = tuple((c, float(last_scores.get(c, math.nan))) for c in remaining)
    return StepwiseTrace(response, tuple(rows), tuple(fits), excluded, p_enter)


def model_summary(trace: StepwiseTrace) -> list:
    """Model Summary rows recomputed from the fits stored in ``trace``."""
    if trace.empty:
        raise AnalysisError("stepwise trace has no entered variables")
    out, prev = [], 0.0
    for i, (fit, row) in enumerate(zip(trace.fits, trace.rows), start=1):
        out.append(_summary_row(i, fit, prev, row.entered))
        prev = fit.r2
    return out


# -- residuals ---------------------------------------------------------------

def _describe(x: np.ndarray) -> tuple:
    return (float(x.min()), float(x.max()), float(x.mean()), float(np.std(x, ddof=1)))


@dataclass(frozen=True)
class ResidualStats:
    predicted: tuple      # (min, max, mean, sd)
    residual: tuple
    std_predicted: tuple
    std_residual: tuple
    n: int

    def as_dict(self) -> dict:
        keys = ("min", "max", "mean", "sd")
        return {
            name: dict(zip(keys, getattr(self, name)))
            for name in ("predicted", "residual", "std_predicted", "std_residual")
        } | {"n": self.n}


def residual_statistics(fit: OlsFit) -> ResidualStats:
    pred = fit.fitted
    sd_pred = float(np.std(pred, ddof=1))
    z_pred = (pred - pred.mean()) / sd_pred if sd_pred > 0 else np.zeros_like(pred)
    z_res = fit.residuals / fit.see if fit.see > 0 else np.zeros_like(pred)
    return ResidualStats(
        predicted=_describe(pred),
        residual=_describe(fit.residuals),
        std_predicted=_describe(z_pred),
        std_residual=_describe(z_res),
        n=fit.n,
    )


# -- prediction --------------------------------------------------------------

@dataclass(frozen=True)
class PublishedModel:
    """A linear prediction equation: intercept plus named coefficients."""

    name: str
    response: str
    intercept: float
    coefficients: Mapping[str, float] = field(default_factory=dict)

    @property
    def predictors(self) -> tuple:
        return tuple(self.coefficients)

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "response": self.response,
                           "intercept": self.intercept,
                           "coefficients": dict(self.coefficients)}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "PublishedModel":
        try:
            obj = json.loads(text)
            return cls(str(obj["name"]), str(obj["response"]), float(obj["intercept"]),
                       {str(k): float(v) for k, v in obj["coefficients"].items()})
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise AnalysisError(f"malformed model file: {exc}") from None

    @classmethod
    def from_fit(cls, fit: OlsFit, name: str = "fitted") -> "PublishedModel":
        return cls(name, fit.response, fit.intercept, fit.coefficients)


_PUBLISHED = (
    PublishedModel("pv_model_4", "pv_kw", 7.468, {
        "irradiance_wm2": 0.017,
        "temperature_c": -0.155,
        "relative_humidity_pct": -0.031,
        "wind_speed_kmh": 0.030,
    }),
    PublishedModel("load_model_2", "load_kw", 15.614, {
        "temperature_c": -0.168,
        "relative_humidity_pct": -0.056,
    }),
)


def published_models() -> list:
    """The PV (four predictors) and load (two predictors) equations."""
    return list(_PUBLISHED)


def get_published_model(name: str) -> PublishedModel:
    for m in _PUBLISHED:
        if m.name == name:
            return m
    raise AnalysisError(f"unknown model {name!r}; available: "
                        + ", ".join(m.name for m in _PUBLISHED))


def predict(model: Union[OlsFit, PublishedModel], inputs: Mapping[str, float]) -> float:
    """Intercept plus the coefficient-weighted inputs; never clamped."""
    value = model.intercept
    for name, coef in model.coefficients.items():
        if name not in inputs or inputs[name] is None:
            raise MissingInputError(name)
        value += coef * float(inputs[name])
    return value
