r"""Special functions needed by the closed-form oracles.

Airy, cylinder Bessel, modified Bessel and log-Gamma values come from
``scipy.special`` behind a validated-domain contract.  The confluent
hypergeometric function of the second kind (Kummer's :math:`\Psi = U`) is
evaluated here from its Laplace integral

.. math::  U(a, b, x) = \frac{x^{-a}}{\Gamma(a)} \int_0^\infty
           e^{-u} u^{a-1} (1 + u/x)^{b-a-1}\, du ,

which stays well conditioned at the degenerate integer values of `b`
where the series form needs logarithmic terms.  Whittaker's
:math:`W_{\kappa,\mu}` is built on top of `U`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, QuadratureError

AIRY_XMIN = -50.0
AIRY_XMAX = 10.0


@dataclass(frozen=True)
class EvalResult:
    """A function value with an estimated absolute error bound."""

    value: float
    abs_error_bound: float

    def __float__(self):
        return float(self.value)


def airy(x: float) -> tuple[float, float, float, float]:
    """Airy functions ``(Ai, Bi, Ai', Bi')`` on the validated range [-50, 10].

    Beyond x = 10 the growth of Bi is reported as a `DomainError` rather
    than returned; use `airy_scaled` for large positive arguments.
    """
    x = float(x)
    if not (AIRY_XMIN <= x <= AIRY_XMAX):
        raise DomainError(f"airy: x={x} outside the validated range [{AIRY_XMIN}, {AIRY_XMAX}]")
    ai, aip, bi, bip = special.airy(x)
    return float(ai), float(bi), float(aip), float(bip)


def airy_scaled(x: float) -> tuple[float, float, float, float]:
    """Exponentially scaled Airy functions for ``x >= 0``.

    Returns ``(Ai e^{z}, Bi e^{-z}, Ai' e^{z}, Bi' e^{-z})`` with
    ``z = 2 x^{3/2} / 3``.
    """
    x = float(x)
    if x < 0.0:
        raise DomainError("airy_scaled expects x >= 0")
    ai, aip, bi, bip = special.airye(x)
    return float(ai), float(bi), float(aip), float(bip)


def airy_modulus_sq_log(x: float) -> float:
    """``log(Ai(x)^2 + Bi(x)^2)`` for any x >= -50 without overflow."""
    x = float(x)
    if x < AIRY_XMIN:
        raise DomainError(f"x={x} below {AIRY_XMIN}")
    if x <= 5.0:
        ai, bi, _, _ = airy(x)
        return math.log(ai * ai + bi * bi)
    ai, bi, _, _ = airy_scaled(x)
    z = 2.0 / 3.0 * x ** 1.5
    # Ai^2 + Bi^2 = e^{2z} (bi_s^2 + ai_s^2 e^{-4z})
    return 2.0 * z + math.log(bi * bi + ai * ai * math.exp(-4.0 * z))


def bessel_j1y1(x: float, derivatives: bool = False):
    """Bessel functions ``(J1, Y1)``; with `derivatives` also ``(J1', Y1')``."""
    x = float(x)
    if not x > 0.0:
        raise DomainError("bessel_j1y1 requires x > 0")
    j1, y1 = float(special.j1(x)), float(special.y1(x))
    if not derivatives:
        return j1, y1
    j1p = float(special.j0(x)) - j1 / x
    y1p = float(special.y0(x)) - y1 / x
    return j1, y1, j1p, y1p


def bessel_k(n: int, x: float) -> float:
    """Modified Bessel function ``K_n(x)`` for ``n`` in {0, 1}."""
    x = float(x)
    if not x > 0.0:
        raise DomainError("bessel_k requires x > 0")
    if n == 0:
        return float(special.k0(x))
    if n == 1:
        return float(special.k1(x))
    raise DomainError("bessel_k supports orders 0 and 1 only")


def bessel_kv(nu: float, x: float) -> float:
    """``K_nu(x)`` for real order, used by the GIG normalizer."""
    if not x > 0.0:
        raise DomainError("bessel_kv requires x > 0")
    return float(special.kv(nu, x))


def ln_gamma(x: float) -> float:
    """``log Gamma(x)`` for ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise DomainError("ln_gamma requires x > 0")
    return float(special.gammaln(x))


def _quad(f, lo, hi, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if points is not None:
                val, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400, points=points)
            else:
                val, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=400)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"kummer_u quadrature failed: {exc}") from None
    return val, err


def kummer_u_eval(a: float, b: float, x: float) -> EvalResult:
    """Kummer ``U(a, b, x)`` with an error estimate; ``a > 0``, ``x > 0``."""
    a, b, x = float(a), float(b), float(x)
    if not a > 0.0:
        raise DomainError(f"kummer_u requires a > 0, got a={a}")
    if not x > 0.0:
        raise DomainError(f"kummer_u requires x > 0, got x={x}")
    c = b - a - 1.0

    # near the origin substitute s = u**a to remove the u**(a-1) singularity
    def head(s):
        u = s ** (1.0 / a)
        return math.exp(-u + c * math.log1p(u / x))

    def tail(u):
        return math.exp(-u + (a - 1.0) * math.log(u) + c * math.log1p(u / x))

    pts = [x ** a] if x < 1.0 else None
    v1, e1 = _quad(head, 0.0, 1.0, points=pts)
    v1, e1 = v1 / a, e1 / a
    v2, e2 = _quad(tail, 1.0, math.inf)
    scale = math.exp(-a * math.log(x) - special.gammaln(a))
    value = scale * (v1 + v2)
    err = scale * (e1 + e2) + 4.0 * np.finfo(float).eps * abs(value)
    return EvalResult(value, err)


def kummer_u(a: float, b: float, x: float) -> float:
    """Kummer ``U(a, b, x)`` (also written Psi) by Laplace-integral quadrature."""
    return kummer_u_eval(a, b, x).value


def kummer_u_prime(a: float, b: float, x: float) -> float:
    """Derivative in `x`: ``U'(a, b, x) = -a U(a+1, b+1, x)``."""
    return -a * kummer_u(a + 1.0, b + 1.0, x)


def whittaker_w(kappa: float, mu: float, x: float) -> tuple[float, float]:
    """Whittaker ``W_{kappa,mu}(x)`` and its derivative in `x`.

    Uses ``W = e^{-x/2} x^{mu+1/2} U(mu - kappa + 1/2, 1 + 2 mu, x)``.
    """
    x = float(x)
    a = mu - kappa + 0.5
    if not a > 0.0:
        raise DomainError(f"whittaker_w needs mu - kappa + 1/2 > 0, got {a}")
    b = 1.0 + 2.0 * mu
    u = kummer_u(a, b, x)
    up = -a * kummer_u(a + 1.0, b + 1.0, x)
    pre = math.exp(-0.5 * x + (mu + 0.5) * math.log(x))
    w = pre * u
    wp = pre * (up + (-0.5 + (mu + 0.5) / x) * u)
    return w, wp


def whittaker_w_logderiv(kappa: float, mu: float, x: float) -> float:
    """``W'/W`` for Whittaker's W, free of the ``e^{-x/2}`` underflow."""
    x = float(x)
    a = mu - kappa + 0.5
    if not a > 0.0:
        raise DomainError(f"whittaker_w needs mu - kappa + 1/2 > 0, got {a}")
    b = 1.0 + 2.0 * mu
    ratio = -a * kummer_u(a + 1.0, b + 1.0, x) / kummer_u(a, b, x)
    return -0.5 + (mu + 0.5) / x + ratio
