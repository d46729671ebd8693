"""Slow arbitrary-precision series for the special functions.

These evaluators are written out term by term in mpmath arithmetic.  They
do not call scipy or mpmath's own special-function routines, so they are
an independent route to the values returned by ``disorder_rmt.specfun``.
The working precision is raised until two successive precisions agree.
"""
from __future__ import annotations

import functools
import math
from fractions import Fraction

import mpmath as mp



@functools.lru_cache(maxsize=None)
def _bernoulli(m: int) -> tuple:
    """Exact B_0 .. B_m from ``sum_{k<=m} C(m+1, k) B_k = 0``."""
    B = [Fraction(1)]
    for j in range(1, m + 1):
        B.append(-sum(math.comb(j + 1, k) * B[k] for k in range(j)) / (j + 1))
    return tuple(B)


def _stable(fn, *args, digits=25):
    """Evaluate `fn` at growing precision until 25 digits are stable."""
    prev = None
    for dps in (60, 120, 240, 480):
        with mp.workdps(dps):
            val = fn(*[mp.mpf(a) for a in args])
            vals = val if isinstance(val, tuple) else (val,)
            if prev is not None and all(abs(v - p) <= mp.mpf(10) ** (-digits) * max(abs(v), mp.mpf(10) ** -30)
                                        for v, p in zip(vals, prev)):
                return val
        prev = vals
    raise RuntimeError(f"{fn.__name__}{args} did not stabilize")


def _series(term0, ratio, kmax=100000):
    s, t, k = term0, term0, 0
    if term0 == 0:
        return s
    while True:
        k += 1
        t = t * ratio(k)
        s += t
        if k > 10 and abs(t) < mp.eps * abs(s):
            return s
        if k > kmax:
            raise RuntimeError("series did not converge")


def ln_gamma(x):
    """Stirling series after shifting the argument up to ``4 * digits``.

    With the shift ``x >= 4 d`` and terms up to ``B_{d/2}`` the truncation
    error is far below ``10^{-d}`` for ``d`` working digits.
    """
    dps = mp.mp.dps
    target = max(40, 4 * dps)
    prod = mp.mpf(1)
    shift = mp.mpf(0)
    while x < target:
        prod *= x
        x += 1
        if prod > mp.mpf(10) ** 1000:
            shift += mp.log(prod)
            prod = mp.mpf(1)
    shift += mp.log(prod)
    s = (x - mp.mpf(1) / 2) * mp.log(x) - x + mp.log(2 * mp.pi) / 2
    nterms = max(16, dps // 4)
    B = _bernoulli(2 * nterms)
    xp = x
    x2 = x * x
    for j in range(1, nterms + 1):
        b = B[2 * j]
        s += mp.mpf(b.numerator) / b.denominator / ((2 * j) * (2 * j - 1) * xp)
        xp *= x2
    return s - shift


def gamma(x):
    if x <= 0:
        return mp.pi / (mp.sin(mp.pi * x) * gamma(1 - x))
    return mp.exp(ln_gamma(x))


def airy(x):
    """Maclaurin series of Ai, Bi, Ai', Bi'."""
    c1 = 1 / (mp.power(3, mp.mpf(2) / 3) * gamma(mp.mpf(2) / 3))
    c2 = 1 / (mp.power(3, mp.mpf(1) / 3) * gamma(mp.mpf(1) / 3))
    x3 = x ** 3
    # f = sum 3^k (1/3)_k x^{3k}/(3k)!, g = sum 3^k (2/3)_k x^{3k+1}/(3k+1)!
    f = _series(mp.mpf(1), lambda k: x3 / ((3 * k - 1) * (3 * k)))
    g = _series(x, lambda k: x3 / ((3 * k) * (3 * k + 1)))
    # term-by-term derivatives, re-indexed to start at their first nonzero term
    fp = _series(x * x / 2, lambda k: x3 / ((3 * k) * (3 * k + 2)))
    gp = _series(mp.mpf(1), lambda k: x3 / ((3 * k - 2) * (3 * k)))
    ai = c1 * f - c2 * g
    bi = mp.sqrt(3) * (c1 * f + c2 * g)
    aip = c1 * fp - c2 * gp
    bip = mp.sqrt(3) * (c1 * fp + c2 * gp)
    return ai, bi, aip, bip


def bessel_j1(x):
    h = x / 2
    return _series(h, lambda k: -h * h / (k * (k + 1)))


def bessel_y1(x):
    """``Y_1 = (2/pi) J_1 ln(x/2) - 2/(pi x) - (1/pi) sum (-1)^k (psi(k+1)+psi(k+2)) (x/2)^{2k+1}/(k!(k+1)!)``."""
    h = x / 2
    t = h
    euler = mp.euler
    s = mp.mpf(0)
    k = 0
    Hk, Hk1 = mp.mpf(0), mp.mpf(1)
    while True:
        term = t * (Hk + Hk1 - 2 * euler)
        s += term
        k += 1
        t = t * (-h * h) / (k * (k + 1))
        Hk += mp.mpf(1) / k
        Hk1 += mp.mpf(1) / (k + 1)
        if k > 10 and abs(t) * (abs(Hk1) + 10) < mp.eps * abs(s):
            break
    return 2 / mp.pi * bessel_j1(x) * mp.log(h) - 2 / (mp.pi * x) - s / mp.pi


def bessel_i(n, x):
    h = x / 2
    t0 = h ** n / mp.factorial(n)
    return _series(t0, lambda k: h * h / (k * (k + n)))


def bessel_k0(x):
    h = x / 2
    t = mp.mpf(1)
    s = mp.mpf(0)
    k = 0
    Hk = mp.mpf(0)
    while True:
        k += 1
        t = t * h * h / (k * k)
        Hk += mp.mpf(1) / k
        s += t * Hk
        if k > 10 and t * Hk < mp.eps * abs(s):
            break
    return -(mp.log(h) + mp.euler) * bessel_i(0, x) + s


def bessel_k1(x):
    """``K_1 = 1/x + ln(x/2) I_1 - (x/4) sum (psi(k+1)+psi(k+2)) (x^2/4)^k/(k!(k+1)!)``."""
    h = x / 2
    t = mp.mpf(1)
    s = mp.mpf(0)
    k = 0
    Hk, Hk1 = mp.mpf(0), mp.mpf(1)
    while True:
        s += t * (Hk + Hk1 - 2 * mp.euler)
        k += 1
        t = t * h * h / (k * (k + 1))
        Hk += mp.mpf(1) / k
        Hk1 += mp.mpf(1) / (k + 1)
        if k > 10 and t * (Hk1 + 10) < mp.eps * abs(s):
            break
    return 1 / x + mp.log(h) * bessel_i(1, x) - x / 4 * s


def kummer_m(a, b, x):
    return _series(mp.mpf(1), lambda k: (a + k - 1) * x / ((b + k - 1) * k))


def kummer_u(a, b, x):
    """``U = G(1-b)/G(a-b+1) M(a,b,x) + G(b-1)/G(a) x^{1-b} M(a-b+1, 2-b, x)`` for non-integer b.

    Integer b is reached as the average of b +- delta with delta shrinking
    with the precision; the limit is smooth in b.
    """
    def raw(bb):
        return (gamma(1 - bb) / gamma(a - bb + 1) * kummer_m(a, bb, x)
                + gamma(bb - 1) / gamma(a) * x ** (1 - bb) * kummer_m(a - bb + 1, 2 - bb, x))

    if b == mp.nint(b):
        d = mp.mpf(10) ** (-(mp.mp.dps // 3))
        return (raw(b + d) + raw(b - d)) / 2
    return raw(b)


def expint_e1(x):
    """``E_1(x) = -gamma - ln x - sum_{k>=1} (-x)^k/(k k!)``."""
    s = mp.mpf(0)
    t = mp.mpf(1)
    k = 0
    while True:
        k += 1
        t = t * (-x) / k
        s += t / k
        if k > 10 and abs(t) < mp.eps * abs(s):
            break
    return -mp.euler - mp.log(x) - s


def whittaker_w(kappa, mu, x):
    return mp.exp(-x / 2) * x ** (mu + mp.mpf(1) / 2) * kummer_u(mu - kappa + mp.mpf(1) / 2, 1 + 2 * mu, x)
