"""
Synthetic weather / PV / load data with Qatar-like marginals.

Weather variables are drawn through a Gaussian copula: correlated standard
normals are mapped to uniforms and then through bounded (scaled beta) or
gamma marginals whose means and standard deviations match the one-year
rooftop record (N = 6830). PV and load follow the published linear
equations plus noise, so the regression and stepwise code can be checked
against known truth.
"""

from __future__ import annotations

import math
from datetime import datetime, timedelta

import numpy as np
from scipy import stats

from .regression import get_published_model
from .timeseries import DEFAULT_SCHEMA, Dataset

__all__ = ["WEATHER", "CORRELATION", "weather", "generate", "bundled_frame"]

# name: (mean, sd, lo, hi); hi=None means a gamma marginal
WEATHER = {
    "irradiance_wm2": (464.1698, 376.76118, 0.0, 1338.71),
    "temperature_c": (29.7239, 8.59091, 8.45, 54.90),
    "relative_humidity_pct": (45.3505, 18.49826, 0.0, 92.43),
    "dust_mgm3": (0.5609, 0.24987, 0.02, 3.00),
    "wind_speed_kmh": (7.3360, 6.95455, 0.0, None),
}

# Latent normal correlations. Irradiance-temperature and
# irradiance-humidity follow the published bivariate coefficients and the
# temperature-humidity coupling is the one implied by the load equation
# and its published marginal correlations. Dust and wind are tied to
# irradiance only, so they carry no information about load; the negative
# couplings make PV-dust and PV-wind come out negative as observed.
_ORDER = list(WEATHER)
CORRELATION = np.array([
    # irr    T      RH     dust   wind
    [1.000, 0.273, -0.409, -0.150, -0.100],
    [0.273, 1.000, -0.590, 0.000, 0.000],
    [-0.409, -0.590, 1.000, 0.000, 0.000],
    [-0.150, 0.000, 0.000, 1.000, 0.000],
    [-0.100, 0.000, 0.000, 0.000, 1.000],
])

PV_R2 = 0.73
LOAD_NOISE_SD = 7.246513
LOAD_NOISE_SHAPE = 2.47


def _marginal(u: np.ndarray, mean: float, sd: float, lo: float, hi) -> np.ndarray:
    if hi is None:
        shape = (mean / sd) ** 2
        return stats.gamma.ppf(u, shape, scale=sd * sd / mean)
    width = hi - lo
    m = (mean - lo) / width
    v = (sd / width) ** 2
    common = m * (1.0 - m) / v - 1.0
    return lo + width * stats.beta.ppf(u, m * common, (1.0 - m) * common)


def weather(n: int, rng: np.random.Generator) -> dict:
    """Draw ``n`` correlated weather rows; returns name -> array."""
    z = rng.multivariate_normal(np.zeros(len(_ORDER)), CORRELATION, size=n, method="cholesky")
    u = stats.norm.cdf(z)
    return {name: _marginal(u[:, i], *WEATHER[name]) for i, name in enumerate(_ORDER)}


def _linear(model, cols: dict) -> np.ndarray:
    out = np.full(len(next(iter(cols.values()))), model.intercept)
    for name, coef in model.coefficients.items():
        out = out + coef * cols[name]
    return out


def generate(n: int = 6830, seed: int = 6830, pv_r2: float = PV_R2,
             start: datetime = datetime(2014, 11, 1)) -> Dataset:
    """
    Hourly synthetic dataset in the default schema.

    PV is the four-predictor published equation plus Gaussian noise scaled
    so the population R squared is ``pv_r2``; load is the two-predictor
    equation plus centred, right-skewed gamma noise. Neither is clipped,
    so the linear models hold exactly in expectation.
    """
    rng = np.random.default_rng(seed)
    cols = weather(n, rng)
    pv_signal = _linear(get_published_model("pv_model_4"), cols)
    sigma = math.sqrt(np.var(pv_signal) * (1.0 - pv_r2) / pv_r2)
    cols["pv_kw"] = pv_signal + rng.normal(0.0, sigma, n)
    scale = LOAD_NOISE_SD / math.sqrt(LOAD_NOISE_SHAPE)
    noise = rng.gamma(LOAD_NOISE_SHAPE, scale, n) - LOAD_NOISE_SHAPE * scale
    cols["load_kw"] = _linear(get_published_model("load_model_2"), cols) + noise
    stamps = tuple(start + timedelta(hours=i) for i in range(n))
    return Dataset(stamps, DEFAULT_SCHEMA, {v.name: cols[v.name] for v in DEFAULT_SCHEMA})


_DECIMALS = {
    "temperature_c": 2, "relative_humidity_pct": 2, "irradiance_wm2": 2,
    "dust_mgm3": 3, "wind_speed_kmh": 2, "pv_kw": 3, "load_kw": 3,
}


def bundled_frame(n_clean: int = 6830, seed: int = 6830) -> Dataset:
    """
    The dataset shipped as ``qatar_synthetic.csv``: ``n_clean`` valid rows
    (PV and load floored at zero, values rounded to sensor precision) plus
    injected defects: 12 rows with a missing cell and 8 with an
    out-of-range reading.
    """
    n_missing, n_range = 12, 8
    n = n_clean + n_missing + n_range
    base = generate(n, seed)
    rng = np.random.default_rng(seed + 1)
    cols = {k: np.round(np.array(v), _DECIMALS[k]) for k, v in base.columns.items()}
    cols["pv_kw"] = np.maximum(cols["pv_kw"], 0.0)
    cols["load_kw"] = np.maximum(cols["load_kw"], 0.0)
    rows = rng.choice(n, size=n_missing + n_range, replace=False)
    names = list(cols)
    for r in rows[:n_missing]:
        cols[names[rng.integers(len(names))]][r] = np.nan
    bad = {"temperature_c": -40.0, "relative_humidity_pct": 130.0,
           "irradiance_wm2": 2100.0, "dust_mgm3": 9.5, "pv_kw": -3.0}
    keys = list(bad)
    for i, r in enumerate(rows[n_missing:]):
        key = keys[i % len(keys)]
        cols[key][r] = bad[key]
    return Dataset(base.timestamps, base.variables, cols)
