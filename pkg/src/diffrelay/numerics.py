"""Self-contained special functions and theta-quadrature.

Only what the closed-form BER machinery needs: the zeroth-order Bessel
function J0, the exponential integral E1, and Gauss-Legendre quadrature
mapped onto [-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

EULER_GAMMA = 0.5772156649015328606

# Hankel-form rational approximations for J0 on [8, inf), from the Cephes
# math library (j0.c, Stephen L. Moshier).  Peak error a few ULP.
_PP = (7.96936729297347051624e-4, 8.28352392107440799803e-2,
       1.23953371646414299388e0, 5.44725003058768775090e0,
       8.74716500199817011941e0, 5.30324038235394892183e0,
       9.99999999999999997821e-1)
_PQ = (9.24408810558863637013e-4, 8.56288474354474431428e-2,
       1.25352743901058953537e0, 5.47097740330417105182e0,
       8.76190883237069594232e0, 5.30605288235394617618e0,
       1.00000000000000000218e0)
_QP = (-1.13663838898469149931e-2, -1.28252718670509318512e0,
       -1.95539544257735972385e1, -9.32060152123768231369e1,
       -1.77681167980488050595e2, -1.47077505154951170175e2,
       -5.14105326766599330220e1, -6.05014350600728481186e0)
_QQ = (6.43178256118178023184e1, 8.56430025976980587198e2,
       3.88240183605401609683e3, 7.24046774195652478189e3,
       5.93072701187316984827e3, 2.06209331660327847417e3,
       2.42005740240291393179e2)

_SQ2OPI = 0.79788456080286535588  # sqrt(2/pi)
_PIO4 = 0.78539816339744830962   # pi/4


def _polevl(x: float, coef) -> float:
    ans = coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _p1evl(x: float, coef) -> float:
    # like _polevl but with an implied leading coefficient of 1
    ans = x + coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def bessel_j0(x: float) -> float:
    """Zeroth-order Bessel function of the first kind.

    Power series for |x| < 8, Hankel asymptotic form with rational
    coefficients beyond.  Absolute error below 1e-12 for |x| <= 50.
    """
    x = abs(float(x))
    if not math.isfinite(x):
        raise ValueError("bessel_j0 requires finite x")
    if x < 8.0:
        q = 0.25 * x * x
        term = 1.0
        total = 1.0
        k = 1
        while True:
            term *= -q / (k * k)
            total += term
            if abs(term) < 1e-17 * max(1.0, abs(total)):
                return total
            k += 1
    z = 25.0 / (x * x)
    w = 5.0 / x
    p = _polevl(z, _PP) / _polevl(z, _PQ)
    q = _polevl(z, _QP) / _p1evl(z, _QQ)
    xn = x - _PIO4
    return _SQ2OPI * (p * math.cos(xn) - w * q * math.sin(xn)) / math.sqrt(x)


def _e1_series(x):
    """-gamma - ln(x) + sum_k (-1)^(k+1) x^k / (k k!), elementwise, x <= 1."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (-x) / k
        contrib = -term / k
        total += contrib
        if np.all(np.abs(contrib) < 1e-18):
            break
    return -EULER_GAMMA - np.log(x) + total


def _e1_cf(x):
    """Continued fraction for exp(x) * E1(x), elementwise, x >= 1.

    Modified Lentz on E1(x) = e^-x / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...))).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tiny = 1e-300
    b = x + 1.0
    c = np.full_like(x, 1e300)
    d = 1.0 / b
    f = d.copy()
    for i in range(1, 200):
        a = -float(i * i)
        b = b + 2.0
        d = 1.0 / (b + a * d)
        c = b + a / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        delta = c * d
        f = f * delta
        if np.all(np.abs(delta - 1.0) < 1e-15):
            break
    return f


def exp_scaled_e1(x):
    """exp(x) * E1(x), elementwise; safe for large x (no overflow)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("exp_scaled_e1 requires x > 0")
    out = np.empty_like(x)
    lo = x <= 1.0
    if np.any(lo):
        out[lo] = np.exp(x[lo]) * _e1_series(x[lo])
    if np.any(~lo):
        out[~lo] = _e1_cf(x[~lo])
    return out if out.ndim else float(out)


def exp_integral_e1(x: float) -> float:
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.

    Power series below 1, continued fraction beyond; relative error
    well under 1e-10 across the positive axis.
    """
    x = float(x)
    if x <= 0.0:
        raise ValueError("exp_integral_e1 requires x > 0")
    if x <= 1.0:
        return float(_e1_series(x))
    return math.exp(-x) * float(_e1_cf(x)[0])


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes/weights mapped onto [-pi, pi]."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        if self.order < 1 or len(self.nodes) != self.order:
            raise ValueError("order must match node count")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if self.nodes[0] <= -np.pi or self.nodes[-1] >= np.pi:
            raise ValueError("nodes must lie inside [-pi, pi]")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if abs(self.weights.sum() - 2 * np.pi) > 1e-12 * 2 * np.pi:
            raise ValueError("weights must sum to 2*pi")

    @classmethod
    def gauss_legendre(cls, order: int) -> "QuadratureRule":
        x, w = np.polynomial.legendre.leggauss(order)
        return cls(nodes=np.pi * x, weights=np.pi * w, order=order)


@lru_cache(maxsize=16)
def theta_rule(order: int = 201) -> QuadratureRule:
    return QuadratureRule.gauss_legendre(order)


def integrate_theta(f, rule: QuadratureRule | None = None) -> float:
    """Integrate f over [-pi, pi]; f must accept an ndarray of angles."""
    if rule is None:
        rule = theta_rule()
    vals = np.asarray(f(rule.nodes), dtype=float)
    return float(np.dot(rule.weights, vals))
