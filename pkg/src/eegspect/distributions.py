"""Survival functions used by the rank tests."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.special import ndtr

__all__ = ["gammaincc", "chi2_sf", "norm_sf", "studentized_range_sf", "studentized_range_isf"]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _lower_series(a: float, x: float) -> float:
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_fraction(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gammaincc(a: float, x: float) -> float:
    """Regularised upper incomplete gamma ``Q(a, x)``."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _lower_series(a, x))
    return min(1.0, _upper_fraction(a, x))


def chi2_sf(x: float, df: float) -> float:
    """``P(X > x)`` for a chi-square variable with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    return gammaincc(df / 2.0, x / 2.0)


def norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def studentized_range_sf(q: float, k: int) -> float:
    """``P(R > q)`` for the range of ``k`` iid standard normals (infinite df).

    Integrates ``k * phi(z) * (Phi(z)**(k-1) - (Phi(z) - Phi(z - q))**(k-1))``
    over ``z``, which is the survival function written without the
    ``1 - cdf`` cancellation.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if q <= 0:
        return 1.0

    def integrand(z):
        upper = ndtr(z)
        inside = upper - ndtr(z - q)
        return k * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) * (upper ** (k - 1) - inside ** (k - 1))

    total = 0.0
    edges = np.linspace(-9.0, 9.0 + q, 7)
    for lo, hi in zip(edges[:-1], edges[1:]):
        part, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
        total += part
    return float(min(max(total, 0.0), 1.0))


def studentized_range_isf(p: float, k: int) -> float:
    """Critical range ``q`` with ``studentized_range_sf(q, k) == p``."""
    from scipy.optimize import brentq

    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return float(brentq(lambda q: studentized_range_sf(q, k) - p, 1e-9, 40.0, xtol=1e-12))
