r"""Closed-form reference values for the impurity models.

Every Monte-Carlo estimator in the package has at least one function here
to compare against.  Conventions: the spectral parameter is ``lam`` for
strings and ``E`` for Schroedinger-type models; complex values are taken on
the ``lam + i0`` branch, where ``Im Omega = -pi N``.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import specfun
from .errors import DomainError, PoleHit, QuadratureError


@dataclass(frozen=True)
class OracleValue:
    """A closed-form value tagged with the formula that produced it."""

    value: complex | float
    formula: str
    params: dict = field(default_factory=dict)

    def __float__(self):
        return float(np.real(self.value))

    def __complex__(self):
        return complex(self.value)


def _quad(f, lo, hi, what, points=None, epsabs=1e-14, epsrel=1e-11):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            kw = {"points": points} if points is not None else {}
            val, _ = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=500, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"{what}: {exc}") from None
    return val


# ---------------------------------------------------------------------------
# free case and deterministic models


@dataclass(frozen=True)
class FreeCase:
    N: float
    w: complex
    sigma_prime: float


def free_case(alpha: float, lam: float) -> FreeCase:
    """IDS, Weyl coefficient and spectral density of ``-psi'' = lam psi``.

    `alpha` is the left boundary parameter (``pi/2`` is Dirichlet).  For
    ``lam < 0`` the Weyl coefficient is real; for ``lam > 0`` it is the
    ``lam + i0`` boundary value.
    """
    lam = float(lam)
    ca, sa = math.cos(alpha), math.sin(alpha)
    if lam < 0.0:
        k = math.sqrt(-lam)
        den = k * ca + sa
        if abs(den) <= 1e-14 * (k + 1.0):
            raise PoleHit(f"free_case: lam={lam} is the pole -tan(alpha)^2 of w")
        return FreeCase(0.0, complex((ca - k * sa) / den), 0.0)
    s = math.sqrt(lam)
    # k = sqrt(-lam - i0) = -i sqrt(lam)
    w = (ca + 1j * s * sa) / (sa - 1j * s * ca)
    if lam == 0.0 and sa == 0.0:
        raise PoleHit("free_case: w has a pole at lam = 0 for alpha = 0")
    dens = s / (sa * sa + lam * ca * ca) / math.pi if lam > 0.0 else 0.0
    return FreeCase(s / math.pi, complex(w), dens)


def kronig_penney_in_band(k: float, ell: float, v: float) -> bool:
    """``|cos(k ell) + sin(k ell) v / (2k)| < 1``: the energy ``k^2`` is in a band."""
    if not k > 0:
        raise DomainError("kronig_penney_in_band requires k > 0")
    return abs(math.cos(k * ell) + math.sin(k * ell) * v / (2.0 * k)) < 1.0


def kronig_penney_gamma(k: float, ell: float, v: float) -> float:
    """Growth rate ``arccosh(|Tr A|/2)/ell`` of the periodic product (0 in a band)."""
    t = abs(math.cos(k * ell) + math.sin(k * ell) * v / (2.0 * k))
    return math.acosh(t) / ell if t > 1.0 else 0.0


@dataclass(frozen=True)
class HomogeneousString:
    Omega: complex
    N: float
    sigma_prime: float
    w: complex


def homogeneous_string(lam: float, m: float, ell: float) -> HomogeneousString:
    """Equal masses `m` at spacing `ell`, Dirichlet condition at the origin.

    Valid for ``lam <= 0`` (real Omega) and inside the band
    ``0 < lam < 4/(m ell)``.
    """
    lam, m, ell = float(lam), float(m), float(ell)
    if not (m > 0 and ell > 0):
        raise DomainError("m and ell must be positive")
    c = 1.0 - lam * m * ell / 2.0
    if lam <= 0.0:
        Om = math.acosh(c) / ell
        return HomogeneousString(complex(Om), 0.0, 0.0, complex(-(1.0 - math.exp(-Om * ell)) / ell))
    if lam >= 4.0 / (m * ell):
        raise DomainError(f"lam={lam} lies outside the band (0, {4.0 / (m * ell)})")
    theta = math.acos(c)
    N = theta / (math.pi * ell)
    dens = math.sqrt(1.0 - c * c) / (math.pi * ell)
    w = -(1.0 - complex(math.cos(theta), math.sin(theta))) / ell
    return HomogeneousString(complex(0.0, -math.pi * N), N, dens, w)


# ---------------------------------------------------------------------------
# white noise


@dataclass(frozen=True)
class Halperin:
    N_airy: float
    N_integral: float
    Omega: complex
    density: float | None


def _xi(sigma):
    if not sigma > 0:
        raise DomainError("noise strength must be positive")
    return (sigma / 2.0) ** (1.0 / 3.0)


def halperin_N(E: float, sigma: float) -> float:
    """IDS of ``-psi'' + sqrt(sigma) B' psi = E psi`` from the Airy modulus."""
    xi = _xi(sigma)
    x = -E / xi ** 2
    return xi / math.pi ** 2 * math.exp(-specfun.airy_modulus_sq_log(x))


def halperin_omega(E: float, sigma: float) -> complex:
    """Complex Lyapunov exponent ``xi (Ai' - i Bi')/(Ai - i Bi)`` at ``-E/xi^2``."""
    xi = _xi(sigma)
    x = -E / xi ** 2
    if x <= 5.0:
        ai, bi, aip, bip = specfun.airy(x)
        return xi * complex(aip, -bip) / complex(ai, -bi)
    ai, bi, aip, bip = specfun.airy_scaled(x)
    e4 = math.exp(-4.0 * (2.0 / 3.0) * x ** 1.5)
    den = bi * bi + ai * ai * e4
    re = (bip * bi + aip * ai * e4) / den
    # imaginary part is -Wronskian/(Ai^2+Bi^2) = -pi N / xi
    return complex(xi * re, -math.pi * halperin_N(E, sigma))


def halperin_N_integral(E: float, sigma: float) -> float:
    r"""IDS from ``1/N = sqrt(2 pi/sigma) 2 int_0^inf exp(-(2/sigma)(s^6/12 + E s^2)) ds``."""
    _xi(sigma)
    g = lambda s: -(2.0 / sigma) * (s ** 6 / 12.0 + E * s * s)
    s_star = math.sqrt(2.0 * math.sqrt(-E)) if E < 0 else 0.0
    gmax = g(s_star)
    width = (sigma / 2.0) ** (1.0 / 6.0)
    hi = s_star + 40.0 * width + 10.0
    pts = [s_star] if s_star > 0 else None
    val = _quad(lambda s: math.exp(g(s) - gmax), 0.0, hi, "halperin_N_integral", pts)
    log_inv = 0.5 * math.log(2.0 * math.pi / sigma) + math.log(2.0 * val) + gmax
    return math.exp(-log_inv)


def halperin_density(z: float, E: float, sigma: float, N: float | None = None) -> float:
    r"""Stationary density of ``dZ = -(Z^2 + E) dt + sqrt(sigma) dW``.

    ``f(z) = (2N/sigma) int_0^inf exp(-(2/sigma)((z^2+E) s - z s^2 + s^3/3)) ds``.
    """
    if N is None:
        N = halperin_N(E, sigma)
    c = 2.0 / sigma
    h = lambda s: -c * ((z * z + E) * s - z * s * s + s ** 3 / 3.0)
    if abs(z) > 1e100:
        return N / (z * z)
    # candidates for the maximum of the exponent: s = 0 and, for E < 0, the
    # local maximum at s = z + sqrt(-E)
    S0 = 1.0 / (c * (z * z + abs(E)) + (c / 3.0) ** (1.0 / 3.0))
    cuts = [0.0, 60.0 * S0]
    hmax = h(0.0)
    if E < 0 and z + math.sqrt(-E) > 0:
        sm = z + math.sqrt(-E)
        Sm = 1.0 / math.sqrt(2.0 * c * math.sqrt(-E))
        hmax = max(hmax, h(sm))
        cuts += [max(sm - 60.0 * Sm, 0.0), sm, sm + 60.0 * Sm]
    cuts = sorted(set(cuts))
    g = lambda s: math.exp(h(s) - hmax)
    tol = 1e-13 * S0
    val = sum(_quad(g, lo, hi, "halperin_density", epsabs=tol, epsrel=1e-10)
              for lo, hi in zip(cuts[:-1], cuts[1:]) if hi > lo)
    val += _quad(g, cuts[-1], math.inf, "halperin_density", epsabs=tol, epsrel=1e-10)
    return 2.0 * N / sigma * val * math.exp(hmax)


def halperin(E: float, sigma: float, z: float | None = None) -> Halperin:
    """White-noise oracles: Airy and integral IDS, Omega and optionally ``f(z)``."""
    Na = halperin_N(E, sigma)
    return Halperin(Na, halperin_N_integral(E, sigma), halperin_omega(E, sigma),
                    None if z is None else halperin_density(z, E, sigma, Na))


# ---------------------------------------------------------------------------
# random strings


def kotani_N(lam: float, m: float, ell: float) -> float:
    """IDS of the string with exponential masses (mean m) and spacings (mean ell)."""
    lam = float(lam)
    if not lam > 0:
        raise DomainError("kotani_N requires lam > 0")
    x = 2.0 / math.sqrt(m * lam * ell)
    j1, y1 = specfun.bessel_j1y1(x)
    return m * lam / math.pi ** 2 / (j1 * j1 + y1 * y1)


def kotani_N_asymptote(lam: float, m: float, ell: float) -> float:
    """Small-``lam`` form ``sqrt(m/ell) sqrt(lam)/pi``."""
    return math.sqrt(m / ell) * math.sqrt(lam) / math.pi


def kotani_letac_mean_w(lam: float, m: float, ell: float) -> float:
    """Mean of ``-w(lam)`` for ``lam < 0``: ``sqrt(-m lam/ell) K0(x)/K1(x)``, ``x = 2/sqrt(-m lam ell)``."""
    lam = float(lam)
    if not lam < 0:
        raise DomainError("kotani_letac_mean_w requires lam < 0")
    x = 2.0 / math.sqrt(-m * lam * ell)
    return math.sqrt(-m * lam / ell) * specfun.bessel_k(0, x) / specfun.bessel_k(1, x)


def nieuwenhuizen_omega_negative(lam: float, ell: float, v: float) -> float:
    """Omega for exponential couplings (mean `v`) and Poisson spacings (mean `ell`), ``lam < 0``.

    ``Omega = -2k W'(x)/W(x)`` with ``W = W_{-1/(2 k ell), 1/2}``, ``x = 2k/v``
    and ``k = sqrt(-lam)``.
    """
    lam = float(lam)
    if not lam < 0:
        raise DomainError("nieuwenhuizen_omega_negative requires lam < 0")
    k = math.sqrt(-lam)
    if v == 0:
        return k
    if not v > 0:
        raise DomainError("mean coupling v must be positive")
    return -2.0 * k * specfun.whittaker_w_logderiv(-1.0 / (2.0 * k * ell), 0.5, 2.0 * k / v)


def dyson_typeI(lam: float, p: float, q: float) -> float:
    """Mean Weyl coefficient of the Type-I string with ``c_j ~ Gamma(p, q)``, ``lam < 0``.

    ``E[w] = -lam U'(p, 1, r)/U(p, 1, r)`` with ``r = -lam/q``.
    """
    lam = float(lam)
    if not lam < 0:
        raise DomainError("dyson_typeI requires lam < 0")
    r = -lam / q
    return -lam * specfun.kummer_u_prime(p, 1.0, r) / specfun.kummer_u(p, 1.0, r)


def dyson_typeI_asymptote(lam: float, q: float) -> float:
    """Small-``lam`` mean spectral density ``q / ln^2(lam/q)`` of the Type-I string."""
    if not 0 < lam < q:
        raise DomainError("asymptote is defined for 0 < lam < q")
    return q / math.log(lam / q) ** 2


def kummer_mean(p: float, r: float) -> float:
    """Mean of the Kummer(p, 0, r) law, ``-U'(p,1,r)/U(p,1,r)``."""
    return -specfun.kummer_u_prime(p, 1.0, r) / specfun.kummer_u(p, 1.0, r)


# ---------------------------------------------------------------------------
# products of matrices


def cohen_newman_gamma_quadrature(alpha: float, beta: float, nodes: int = 4096) -> float:
    """Mean of ``ln|A u(theta)|`` over uniform directions, ``A = [[alpha, beta], [0, 1/alpha]]``.

    The integrand is smooth and periodic, so the trapezoid rule converges
    geometrically.
    """
    if alpha == 0:
        raise DomainError("alpha must be nonzero")
    th = 2.0 * math.pi * np.arange(nodes) / nodes
    c, s = np.cos(th), np.sin(th)
    y = 0.5 * np.log((alpha * c + beta * s) ** 2 + (s / alpha) ** 2)
    return float(np.mean(y))


def cohen_newman_gamma_closed(alpha: float, beta: float) -> float:
    """``ln((s1 + s2)/2)`` in terms of the singular values: ``0.5 ln(((alpha+1/alpha)^2 + beta^2)/4)``."""
    return 0.5 * math.log(((alpha + 1.0 / alpha) ** 2 + beta ** 2) / 4.0)


# ---------------------------------------------------------------------------
# tails and level statistics


def lifshitz_tail(E: float, sigma: float) -> float:
    """Leading ``ln N ~ -(8/(3 sigma)) |E|^{3/2}`` as ``E -> -inf``."""
    if not E < 0:
        raise DomainError("lifshitz_tail requires E < 0")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    return -8.0 / (3.0 * sigma) * abs(E) ** 1.5


def gumbel_cdf(x: float) -> float:
    return -math.expm1(-math.exp(x))


def level_poisson_pmf(n: int, LN: float) -> float:
    """Probability of `n` levels below E in a sample with ``L N(E) = LN``."""
    if n < 0:
        return 0.0
    if LN == 0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(LN) - LN - math.lgamma(n + 1))


# ---------------------------------------------------------------------------
# export


def oracle_grid(fn, xs, path=None, header=("x", "value")):
    """Evaluate ``fn`` on `xs`; optionally write a two-column CSV.  Returns the values."""
    vals = [fn(x) for x in xs]
    if path is not None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(header)
            for x, v in zip(xs, vals):
                wr.writerow([repr(float(x)), repr(float(np.real(v)))])
    return vals
