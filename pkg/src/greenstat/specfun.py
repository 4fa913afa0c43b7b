"""
Special functions behind every significance level in the reports.

The regularized incomplete beta function is evaluated with the modified
Lentz continued fraction; Student t and Fisher F tail areas are expressed
through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, NumericError

__all__ = [
    "PValue",
    "ln_gamma",
    "reg_inc_beta",
    "t_two_tailed_p",
    "f_upper_p",
    "format_p",
]

MAX_ITER = 300
EPS = 1e-15
_TINY = 1e-300


@dataclass(frozen=True)
class PValue:
    """Tail probability together with the statistic that produced it."""

    value: float
    test_statistic: float
    df1: float
    df2: Optional[float] = None

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return format_p(self.value)


def format_p(p: float) -> str:
    """Render a probability with three decimals and no leading zero (``.000``)."""
    if p is None or math.isnan(p):
        return ""
    s = f"{p:.3f}"
    return s[1:] if s.startswith("0") else s


def ln_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for ``x > 0``."""
    if not x > 0 or math.isinf(x):
        raise DomainError(f"ln_gamma requires a finite x > 0, got {x!r}")
    return math.lgamma(x)


# Stirling series coefficients B_2k / (2k (2k - 1))
_STIRLING = (1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680, 1.0 / 1188,
             -691.0 / 360360, 1.0 / 156, -3617.0 / 122400)
_LARGE = 10.0
_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirling_tail(x: float) -> float:
    # ln_gamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2], for x >= _LARGE
    inv2 = 1.0 / (x * x)
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc / x


def _ln_beta(a: float, b: float) -> float:
    """ln B(a, b) without differencing large ln_gamma values."""
    small, big = min(a, b), max(a, b)
    if big < _LARGE:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    s = a + b
    tails = _stirling_tail(big) - _stirling_tail(s)
    if small < _LARGE:
        # ln_gamma(big) - ln_gamma(big + small), expanded
        diff = -(big - 0.5) * math.log1p(small / big) - small * math.log(s) + small + tails
        return math.lgamma(small) + diff
    return (_HALF_LN_2PI + (a - 0.5) * math.log(a / s) + (b - 0.5) * math.log(b / s)
            - 0.5 * math.log(s) + _stirling_tail(small) + tails)


def _beta_cf(a: float, b: float, x: float) -> float:
    # Continued fraction for I_x(a, b), modified Lentz.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= EPS:
            return h
    raise NumericError(
        f"incomplete beta continued fraction did not converge in {MAX_ITER} "
        f"iterations (a={a}, b={b}, x={x})")


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """
    Regularized incomplete beta function I_x(a, b).

    Parameters
    ----------
    a, b : float
        Shape parameters, both strictly positive.
    x : float
        Upper integration limit in [0, 1].

    Returns
    -------
    float
        Value in [0, 1].

    Raises
    ------
    DomainError
        If any argument is outside its domain.
    NumericError
        If the continued fraction fails to converge.
    """
    if not (a > 0 and b > 0) or math.isinf(a) or math.isinf(b):
        raise DomainError(f"reg_inc_beta requires a, b > 0, got a={a!r}, b={b!r}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"reg_inc_beta requires 0 <= x <= 1, got x={x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - _ln_beta(a, b)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        value = front * _beta_cf(a, b, x) / a
    else:
        value = 1.0 - front * _beta_cf(b, a, 1.0 - x) / b
    return min(1.0, max(0.0, value))


def t_two_tailed_p(t: float, df: float) -> PValue:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df!r}")
    if math.isnan(t):
        raise DomainError("t statistic is NaN")
    if math.isinf(t):
        return PValue(0.0, t, df)
    t2 = t * t
    x = df / (df + t2)
    return PValue(reg_inc_beta(df / 2.0, 0.5, x), t, df)


def f_upper_p(f: float, df1: float, df2: float) -> PValue:
    """P(F >= f) for Fisher's F with (df1, df2) degrees of freedom."""
    if not (df1 > 0 and df2 > 0):
        raise DomainError(f"degrees of freedom must be positive, got ({df1!r}, {df2!r})")
    if math.isnan(f) or f < 0:
        raise DomainError(f"F statistic must be nonnegative, got {f!r}")
    if math.isinf(f):
        return PValue(0.0, f, df1, df2)
    x = df2 / (df2 + df1 * f)
    return PValue(reg_inc_beta(df2 / 2.0, df1 / 2.0, x), f, df1, df2)
