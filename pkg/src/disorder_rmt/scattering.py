r"""Reflexion and transmission of a plane wave by a finite disordered sample.

For ``E = k^2 > 0`` the sample ``[0, L]`` is probed by
``psi = e^{ikx} + R e^{-ikx}`` on the left and ``psi = T e^{ikx}`` on the
right.  Everything is computed at ``k = 1``: a sample at wavenumber `k` is
the same as one with spacings ``k ell`` and couplings ``v/k``.

With :math:`\mathcal{X} = \mathcal{A}_0^{-1}\circ\cdots\circ\mathcal{A}_n^{-1}`,

.. math::  R = -\frac{\mathcal{X}(i) - i}{\mathcal{X}(i) + i},
           \qquad |T|^2 = \frac{4}{2 + |\Pi|_F^2}.

The backward walk :math:`\mathcal{X}_n(i)` converges to a real limit
:math:`X_\infty` when the Lyapunov exponent is positive; ``-X_\infty`` has
the stationary Riccati law, which fixes the law of the reflexion phase.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _kernels
from .ensembles import FrischLloyd, KronigPenney, RandomStream, impurity_form
from .errors import FitUnstable, NonConvergence, ValidationError
from .lyapunov import Estimate
from .parallel import map_replicas
from .riccati import HistogramDensity
from .spectral import Realization, complex_lyapunov, sample_realization, with_energy


@dataclass(frozen=True)
class ScatterResult:
    """Scattering data of one sample.

    ``log_abs_T`` stays finite when ``|T|`` underflows; ``T2_product`` is
    ``|T|^2`` from the Frobenius norm of the transfer product, an
    independent route to the same number.
    """

    R: complex
    T: complex
    L: float
    k: float
    log_abs_T: float
    T2_product: float
    min_im: float

    @property
    def unitarity_defect(self) -> float:
        return abs(abs(self.R) ** 2 + abs(self.T) ** 2 - 1.0)

    @property
    def phase(self) -> float:
        """``arg R`` in ``[-pi, pi)``; nan when ``R = 0``."""
        if self.R == 0:
            return math.nan
        th = math.atan2(self.R.imag, self.R.real)
        return -math.pi if th == math.pi else th


def _scaled_cells(real: Realization, k: float):
    if real.kind != "coupling":
        raise ValidationError("scattering is defined for delta-coupling samples, not strings")
    if not (k > 0 and math.isfinite(k)):
        raise ValidationError("the wavenumber k must be positive")
    return np.ascontiguousarray(real.spacings * k), np.ascontiguousarray(real.weights / k)


def rt_coefficients(real: Realization, k: float = 1.0) -> ScatterResult:
    """Reflexion and transmission coefficients of `real` at wavenumber `k`.

    The left state ``(a, b)`` is obtained from ``(i, 1)`` at ``x = L`` by
    the inverse cell maps, so ``X(i) = a/b``; then ``T e^{ikL} = 2/(b - i a)``
    once the scale is restored and ``R = b T e^{ikL} - 1``.
    """
    ell, v = _scaled_cells(real, k)
    L = float(math.fsum(real.spacings))
    if ell.size == 0:
        return ScatterResult(0j, 1 + 0j, 0.0, k, 0.0, 1.0, 1.0)
    out = np.empty(7)
    _kernels.scatter_back(ell, v, out)
    a = complex(out[0], out[1])
    b = complex(out[2], out[3])
    ls, lf = out[4], out[5]
    g = b - 1j * a
    log_abs_T = math.log(2.0) - ls - math.log(abs(g))
    kL = float(math.fsum(ell))
    T = math.exp(log_abs_T) * (2.0 / g) / abs(2.0 / g) * complex(math.cos(kL), -math.sin(kL))
    X = a / b if b != 0 else complex(math.inf)
    if math.isinf(X.real) or math.isinf(X.imag):
        R = -1 + 0j
    else:
        R = -(X - 1j) / (X + 1j)
    T2p = 4.0 / (2.0 + math.exp(lf)) if lf < 700 else 4.0 * math.exp(-lf)
    return ScatterResult(complex(R), complex(T), L, k, log_abs_T, T2p, float(out[6]))


def transmission_from_product(real: Realization, k: float = 1.0) -> float:
    """``|T|^2 = 4/(2 + |Pi|_F^2)`` from the transfer product alone."""
    return rt_coefficients(real, k).T2_product


def wave_matching(real: Realization, k: float = 1.0) -> tuple[complex, complex]:
    """``(R, T)`` by solving the matching conditions as one linear system.

    Between impurities ``psi = A_j e^{ikx} + B_j e^{-ikx}``; at each impurity
    psi is continuous and psi' jumps by ``v psi``.  Dense solve, so only
    meant for small samples.
    """
    if real.kind != "coupling":
        raise ValidationError("scattering is defined for delta-coupling samples, not strings")
    x = np.cumsum(real.spacings)[:-1]
    v = real.weights[1:]
    n = x.size
    if n == 0:
        return 0j, 1 + 0j
    # unknowns: R, (A_j, B_j) for the n-1 inner intervals, T
    m = 2 * n
    M = np.zeros((m, m), dtype=complex)
    rhs = np.zeros(m, dtype=complex)

    def coef(j):
        # column offsets of (A, B) in region j; region 0 is the incoming one
        if j == 0:
            return None
        if j == n:
            return m - 1
        return 1 + 2 * (j - 1)

    for i, (xi, vi) in enumerate(zip(x, v)):
        ep, em = np.exp(1j * k * xi), np.exp(-1j * k * xi)
        r0, r1 = 2 * i, 2 * i + 1
        # left region i, right region i+1: psi_R - psi_L = 0, psi'_R - psi'_L - v psi = 0
        for side, sgn in ((i, -1.0), (i + 1, 1.0)):
            c = coef(side)
            if side == 0:
                rhs[r0] -= sgn * ep
                rhs[r1] -= sgn * 1j * k * ep
                M[r0, 0] += sgn * em
                M[r1, 0] += sgn * (-1j * k) * em
            elif side == n:
                M[r0, c] += sgn * ep
                M[r1, c] += sgn * 1j * k * ep
                if sgn > 0:
                    M[r1, c] -= vi * ep
            else:
                M[r0, c] += sgn * ep
                M[r0, c + 1] += sgn * em
                M[r1, c] += sgn * 1j * k * ep
                M[r1, c + 1] += sgn * (-1j * k) * em
                if sgn > 0:
                    M[r1, c] -= vi * ep
                    M[r1, c + 1] -= vi * em
    sol = np.linalg.solve(M, rhs)
    return complex(sol[0]), complex(sol[-1])


# ---------------------------------------------------------------------------
# decay with length


@dataclass
class DecayFit:
    """Linear fit of ``E[ln |T_L|]`` against ``L``."""

    slope: float
    stderr: float
    intercept: float
    r2: float
    gamma_ref: float | None
    lengths: np.ndarray
    means: np.ndarray
    sems: np.ndarray

    @property
    def estimate(self) -> Estimate:
        return Estimate(self.slope, self.stderr, int(self.lengths.size))

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2, "gamma_ref": self.gamma_ref}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _scattering_spec(spec, k):
    if not isinstance(spec, (FrischLloyd, KronigPenney)):
        raise ValidationError("scattering needs a delta-impurity model (frisch-lloyd or kronig-penney)")
    if not k > 0:
        raise ValidationError("the wavenumber k must be positive")
    return with_energy(spec, k * k)


def _log_T_replica(args):
    spec, stream, lengths, k = args
    out = np.empty(len(lengths))
    for i, L in enumerate(lengths):
        real = sample_realization(spec, stream.child(i), L=L)
        out[i] = rt_coefficients(real, k).log_abs_T
    return out


def decay_rate(spec, k: float, lengths, replicas: int, rng, *, gamma_ref: float | None = None,
               gamma_L: float = 1e5, workers=None) -> DecayFit:
    """Slope of ``E[ln |T_L|]`` against ``L``; tends to ``-gamma(k^2)``.

    `gamma_ref` defaults to the node-counting/norm-growth estimate of
    gamma over a sample of length `gamma_L`.  Raises `FitUnstable` when a
    slope distinguishable from zero comes with ``R^2 < 0.99``; a flat fit
    (slope within three standard errors of zero) has no meaningful
    ``R^2`` and is accepted.
    """
    spec = _scattering_spec(spec, k)
    lengths = np.asarray(lengths, dtype=float)
    if lengths.size < 3 or np.any(lengths <= 0):
        raise ValidationError("need at least three positive lengths")
    if replicas < 2:
        raise ValidationError("need at least two replicas")
    root = rng if isinstance(rng, RandomStream) else RandomStream(int(rng))
    rows = map_replicas(_log_T_replica, [(spec, root.child(r), lengths, k) for r in range(replicas)], workers)
    y = np.array(rows)
    means = y.mean(axis=0)
    sems = y.std(axis=0, ddof=1) / math.sqrt(replicas)
    if np.ptp(means) == 0.0:
        slope, intercept, r2, se = 0.0, float(means[0]), 1.0, 0.0
    else:
        fit = stats.linregress(lengths, means)
        slope, intercept, r2, se = float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2), float(fit.stderr)
        # replica noise of the per-length means also enters the slope error
        w = lengths - lengths.mean()
        se = math.hypot(se, math.sqrt(float(np.sum(w ** 2 * sems ** 2))) / float(np.sum(w ** 2)))
        if r2 < 0.99 and abs(slope) > 3.0 * se:
            raise FitUnstable(f"decay_rate: R^2 = {r2:.4f} < 0.99 for slope {slope:.4g}")
    if gamma_ref is None:
        gamma_ref = complex_lyapunov(spec, L=gamma_L, rng=root.child(replicas)).gamma.value
    return DecayFit(slope, se, intercept, r2, float(gamma_ref), lengths, means, sems)


# ---------------------------------------------------------------------------
# reflexion phase


@dataclass
class PhaseSample:
    """Reflexion phases of long samples; `degenerate` marks ``R = 0`` (no scattering)."""

    theta: np.ndarray
    X: np.ndarray
    steps: np.ndarray
    degenerate: bool = False

    def histogram(self, nbins: int = 32) -> HistogramDensity:
        edges = np.linspace(-math.pi, math.pi, nbins + 1)
        return HistogramDensity.from_samples(self.theta, edges)

    def to_csv(self, path, nbins: int = 32):
        self.histogram(nbins).to_csv(path)


def phase_of(X) -> np.ndarray:
    """``arg R`` in ``[-pi, pi)`` for a real limit ``X`` (``R = -(X-i)/(X+i)``)."""
    X = np.asarray(X, dtype=float)
    # R = e^{-2 i atan(-X)}; X = +-inf both give R = -1
    th = -2.0 * np.arctan(-X)
    return np.where(np.isinf(X) | (th >= math.pi), -math.pi, th)


def _backward_limit_one(args):
    spec, stream, k, tol, cap, chunk = args
    gen = stream.generator
    _, spacing, kick, scale = impurity_form(spec)
    P = np.array([1.0, 0.0, 0.0, 1.0])
    used = 0
    while used < cap:
        m = min(chunk, cap - used)
        ell = np.ascontiguousarray(spacing.sample(gen, m) * k)
        v = np.ascontiguousarray(scale * kick.sample(gen, m) / k)
        if used == 0:
            v[0] = 0.0
        j = _kernels.backward_walk(ell, v, P, 1j, 2j, tol)
        if j >= 0:
            used += j
            num = P[0] * 1j + P[1]
            den = P[2] * 1j + P[3]
            X = (num / den).real if den != 0 else math.inf
            return X, used
        used += m
    raise NonConvergence(f"reflexion_phase_histogram: backward walk from i and 2i still apart after {cap} cells")


def reflexion_phase_histogram(spec, replicas: int, rng, *, k: float | None = None, tol: float = 1e-12,
                              cap: int = 1_000_000, workers=None) -> PhaseSample:
    """Reflexion phase of semi-infinite samples, one per replica.

    Each replica runs the backward walk ``X_n = X_{n-1} o A_{n-1}^{-1}``
    until ``X_n(i)`` and ``X_n(2i)`` agree to `tol` (chordal distance); the
    common value is the real limit ``X_inf``.  `k` defaults to ``sqrt(E)``
    of the spec.  A spec without scatterers returns the degenerate flag.
    """
    if k is None:
        if not isinstance(spec, (FrischLloyd, KronigPenney)):
            raise ValidationError("scattering needs a delta-impurity model (frisch-lloyd or kronig-penney)")
        if not spec.E > 0:
            raise ValidationError("scattering needs E = k^2 > 0")
        k = math.sqrt(spec.E)
    spec = _scattering_spec(spec, k)
    _, _, kick, scale = impurity_form(spec)
    if scale == 0.0 or (kick.kind == "constant" and kick.params[0] == 0.0):
        return PhaseSample(np.empty(0), np.empty(0), np.empty(0, dtype=int), degenerate=True)
    root = rng if isinstance(rng, RandomStream) else RandomStream(int(rng))
    res = map_replicas(_backward_limit_one, [(spec, root.child(r), k, tol, cap, 256) for r in range(replicas)],
                       workers)
    X = np.array([r[0] for r in res])
    steps = np.array([r[1] for r in res])
    return PhaseSample(phase_of(X), X, steps)


def phase_bin_probabilities(hist: HistogramDensity, theta_edges, k: float = 1.0) -> np.ndarray:
    """Probability of each phase bin implied by the stationary density `hist`.

    ``-X_inf`` has the stationary law of ``Z/k``, and ``theta = -2 atan(-X)``,
    so ``theta`` in ``[t0, t1)`` means ``Z/k`` in ``(-tan(t1/2), -tan(t0/2)]``.
    The CDF of Z is piecewise linear inside the bins with ``1/z^2`` tails
    carrying the masses outside the range.
    """
    theta_edges = np.asarray(theta_edges, dtype=float)
    if theta_edges[0] < -math.pi or theta_edges[-1] > math.pi or np.any(np.diff(theta_edges) <= 0):
        raise ValidationError("phase edges must increase within [-pi, pi]")
    with np.errstate(over="ignore", divide="ignore"):
        y = -np.tan(theta_edges / 2.0) * k
    y = np.where(theta_edges <= -math.pi, np.inf, y)
    y = np.where(theta_edges >= math.pi, -np.inf, y)
    F = histogram_cdf(hist, y)
    return F[:-1] - F[1:]


def histogram_cdf(hist: HistogramDensity, z) -> np.ndarray:
    """CDF of the binned law with ``1/z^2`` tails outside the bin range."""
    z = np.asarray(z, dtype=float)
    n = float(hist.n)
    lo, hi = hist.edges[0], hist.edges[-1]
    cum = np.concatenate([[0.0], np.cumsum(hist.counts)]) + hist.below
    inner = np.interp(np.clip(z, lo, hi), hist.edges, cum) / n
    out = inner.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        left = (hist.below / n) * (abs(lo) / np.abs(z))
        right = 1.0 - (hist.above / n) * (hi / z)
    out = np.where(z < lo, np.where(np.isinf(z), 0.0, left), out)
    out = np.where(z > hi, np.where(np.isinf(z), 1.0, right), out)
    return out


def phase_density_from_f(f, theta) -> np.ndarray:
    """Density of the reflexion phase from a stationary density `f`.

    `f` is a callable density of Z (at ``k = 1``) or a `HistogramDensity`.
    The phase density is ``f(-sin t/(1 + cos t))/(1 + cos t)``.
    """
    theta = np.asarray(theta, dtype=float)
    if isinstance(f, HistogramDensity):
        h = f
        dens = h.density

        def f(z):
            z = np.asarray(z, dtype=float)
            idx = np.searchsorted(h.edges, z, side="right") - 1
            ok = (idx >= 0) & (idx < dens.size)
            return np.where(ok, dens[np.clip(idx, 0, dens.size - 1)], 0.0)

    c = 1.0 + np.cos(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.asarray(f(-np.sin(theta) / c), dtype=float) / c
    return np.where(c > 0, out, 0.0)


def chi2_phase_test(sample: PhaseSample, hist: HistogramDensity, nbins: int = 32, k: float = 1.0):
    """Chi-square test of the phase sample against `phase_bin_probabilities`.

    Returns ``(statistic, p_value, expected, observed)``; bins with fewer
    than five expected counts are pooled with a neighbour.
    """
    edges = np.linspace(-math.pi, math.pi, nbins + 1)
    p = phase_bin_probabilities(hist, edges, k)
    p = p / p.sum()
    obs = np.histogram(sample.theta, edges)[0].astype(float)
    exp = p * obs.sum()
    o, e = [], []
    acc_o = acc_e = 0.0
    for oi, ei in zip(obs, exp):
        acc_o += oi
        acc_e += ei
        if acc_e >= 5.0:
            o.append(acc_o)
            e.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and e:
        o[-1] += acc_o
        e[-1] += acc_e
    o, e = np.array(o), np.array(e)
    stat = float(np.sum((o - e) ** 2 / e))
    pval = float(stats.chi2.sf(stat, o.size - 1))
    return stat, pval, e, o


# ---------------------------------------------------------------------------
# forward against backward iteration


def iterates(real: Realization, k: float = 1.0, direction: str = "backward") -> np.ndarray:
    """Trajectory of ``i`` under the inverse cell maps.

    ``"backward"`` gives ``A_0^{-1} o ... o A_n^{-1}(i)`` for growing n,
    which converges when gamma > 0; ``"forward"`` gives
    ``A_n^{-1} o ... o A_0^{-1}(i)``, which keeps wandering in the
    half-plane.
    """
    ell, v = _scaled_cells(real, k)
    c, s = np.cos(ell), np.sin(ell)
    m11, m12, m21, m22 = c + v * s, s - v * c, -s, c
    out = np.empty(ell.size, dtype=complex)
    if direction == "backward":
        P = np.eye(2)
        for j in range(ell.size):
            P = P @ np.array([[m11[j], m12[j]], [m21[j], m22[j]]])
            P /= np.abs(P).max()
            out[j] = (P[0, 0] * 1j + P[0, 1]) / (P[1, 0] * 1j + P[1, 1])
    elif direction == "forward":
        z = 1j
        for j in range(ell.size):
            z = (m11[j] * z + m12[j]) / (m21[j] * z + m22[j])
            out[j] = z
    else:
        raise ValidationError("direction must be 'backward' or 'forward'")
    return out
