r"""The Riccati variable :math:`Z = \psi'/\psi` of impurity models.

Forward orbits follow :math:`Z` from impurity to impurity and give the
stationary density :math:`f`; backward compositions
:math:`\mathcal{A}_1\circ\cdots\circ\mathcal{A}_n(z)` converge to a random
limit :math:`Z_\infty` with the same law.  The tail of :math:`f` gives the
integrated density of states (``N = lim z^2 f``) and its principal-value
mean gives the Lyapunov exponent.

The white-noise limit is an SDE,

.. math::  dZ = -(Z^2 + E)\,dt + \sqrt{\sigma}\,dW,

integrated by Euler-Maruyama with reinjection at ``+Z_max`` whenever ``Z``
escapes below ``-Z_max``.  Each escape is a zero of :math:`\psi`.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .algebra import mobius_apply_array
from .ensembles import (DysonString, DysonTypeI, as_generator,
                        cell_matrices, impurity_form, sample_matrices)
from .errors import NonConvergence, StepTooLarge, TailUnresolved, ValidationError
from .lyapunov import Estimate, batch_estimate

CHUNK = 1 << 20
NBATCH = 32


# ---------------------------------------------------------------------------
# histograms


def symmetric_edges(zmax: float, nbins: int, core: float = 1.0) -> np.ndarray:
    """Bin edges on ``[-zmax, zmax]``, uniform in ``asinh(z/core)``.

    Bins are mirror images of each other (``edges == -edges[::-1]``), fine
    near the origin and logarithmic in the tails.
    """
    if nbins < 2 or nbins % 2:
        raise ValidationError("nbins must be even and >= 2")
    u = np.linspace(-math.asinh(zmax / core), math.asinh(zmax / core), nbins + 1)
    e = core * np.sinh(u)
    e[nbins // 2] = 0.0
    e = 0.5 * (e - e[::-1])
    return e


@dataclass
class HistogramDensity:
    """Binned empirical law on the real line.

    ``counts[i]`` samples fell in ``[edges[i], edges[i+1])``; `below` and
    `above` count samples outside the range.  ``moments[i]`` is the sum of
    the samples in bin i, which makes bin-restricted means exact.
    """

    edges: np.ndarray
    counts: np.ndarray
    n: int
    below: int = 0
    above: int = 0
    moments: np.ndarray | None = None

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.counts = np.asarray(self.counts)
        if self.edges.ndim != 1 or self.counts.shape != (self.edges.size - 1,):
            raise ValidationError("need len(edges) == len(counts) + 1")
        if np.any(np.diff(self.edges) <= 0):
            raise ValidationError("bin edges must be increasing")
        if self.moments is not None:
            self.moments = np.asarray(self.moments, dtype=float)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.n * self.widths)

    @property
    def tail_mass(self) -> float:
        return (self.below + self.above) / self.n

    def integral(self) -> float:
        return float(np.sum(self.density * self.widths))

    def is_symmetric(self, rtol=1e-12) -> bool:
        return bool(np.allclose(self.edges, -self.edges[::-1], rtol=rtol, atol=rtol * abs(self.edges[-1])))

    def merge(self, other: "HistogramDensity") -> "HistogramDensity":
        if not np.array_equal(self.edges, other.edges):
            raise ValidationError("histograms have different bins")
        mom = None if self.moments is None or other.moments is None else self.moments + other.moments
        return HistogramDensity(self.edges, self.counts + other.counts, self.n + other.n,
                                self.below + other.below, self.above + other.above, mom)

    @classmethod
    def from_samples(cls, z, edges) -> "HistogramDensity":
        z = np.asarray(z, dtype=float)
        edges = np.asarray(edges, dtype=float)
        idx = np.searchsorted(edges, z, side="right") - 1
        inside = (idx >= 0) & (idx < edges.size - 1)
        counts = np.bincount(idx[inside], minlength=edges.size - 1)
        moments = np.bincount(idx[inside], weights=z[inside], minlength=edges.size - 1)
        return cls(edges, counts, z.size, int(np.sum(idx < 0)), int(np.sum(idx >= edges.size - 1)), moments)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# n={self.n} below={self.below} above={self.above}\n")
            wr = csv.writer(fh)
            wr.writerow(["bin_left", "bin_right", "count", "density"])
            for a, b, c, d in zip(self.edges[:-1], self.edges[1:], self.counts, self.density):
                wr.writerow([repr(float(a)), repr(float(b)), int(c), repr(float(d))])

    @classmethod
    def from_csv(cls, path) -> "HistogramDensity":
        meta = {}
        rows = []
        with open(path, newline="") as fh:
            for line in fh:
                if line.startswith("#"):
                    meta = dict(kv.split("=") for kv in line[1:].split())
                    continue
                if line.startswith("bin_left"):
                    continue
                a, b, c, d = line.strip().split(",")
                rows.append((float(a), float(b), int(c), float(d)))
        edges = np.array([r[0] for r in rows] + [rows[-1][1]])
        counts = np.array([r[2] for r in rows])
        if "n" in meta:
            n = int(meta["n"])
        else:
            k = int(np.argmax(counts))
            n = int(round(counts[k] / (rows[k][3] * (rows[k][1] - rows[k][0]))))
        return cls(edges, counts, n, int(meta.get("below", 0)), int(meta.get("above", 0)))


# ---------------------------------------------------------------------------
# configuration and forward orbits


@dataclass(frozen=True)
class RiccatiOrbitConfig:
    """Run parameters for Riccati orbits.

    `lam` overrides the spectral parameter of the spec when given (``E``
    for delta impurities, ``lam`` for strings).
    """

    lam: float | None = None
    burnin: int = 1000
    steps: int = 100_000
    zmax: float | None = None
    z0: float = 0.0

    def __post_init__(self):
        if self.burnin < 1000:
            raise ValidationError("burn-in must be at least 1000 steps")
        if self.steps < 1:
            raise ValidationError("steps must be positive")
        if self.zmax is not None and self.zmax < 10:
            raise ValidationError("zmax must be at least 10")

    def zmax_for(self, E: float) -> float:
        return self.zmax if self.zmax is not None else max(100.0, 10.0 * math.sqrt(abs(E) + 1.0))


def _with_param(spec, lam):
    if lam is None:
        return spec
    if isinstance(spec, (DysonString, DysonTypeI)):
        return dataclasses.replace(spec, lam=float(lam))
    return dataclasses.replace(spec, E=float(lam))


def cell_map(z, ell, v, E):
    """Riccati map of one cell: kick ``z -> z + v``, then free motion over `ell`."""
    a, b, c, d = cell_matrices(E, np.asarray(ell, dtype=float), np.asarray(v, dtype=float))
    return mobius_apply_array(a, b, c, d, np.asarray(z, dtype=float))


def _state_from_slope(z0, E):
    if math.isinf(z0):
        p, q = 1.0, 0.0
    else:
        r = math.hypot(z0, 1.0)
        p, q = z0 / r, 1.0 / r
    return np.array([p, q, 1.0 if q >= 0 else -1.0])


class _Orbit:
    """Forward Riccati chain of an impurity spec, drawn chunk by chunk."""

    def __init__(self, spec, cfg: RiccatiOrbitConfig, rng):
        self.spec = _with_param(spec, cfg.lam)
        if isinstance(self.spec, DysonTypeI):
            raise ValidationError("the Type-I string is not an i.i.d. chain; use backward_limit")
        self.E, self.spacing, self.kick, self.scale = impurity_form(self.spec)
        self.gen = as_generator(rng)
        self.state = _state_from_slope(float(cfg.z0), self.E)
        self.cfg = cfg

    def run(self, m, edges=None, hist=None, want_z=False):
        ell = self.spacing.sample(self.gen, m)
        v = self.scale * self.kick.sample(self.gen, m)
        zout = np.empty(m) if want_z else np.empty(0)
        ls, lc = np.zeros(1), np.zeros(1)
        nodes = np.zeros(1, dtype=np.int64)
        if edges is None:
            e, hc, hm, tl = np.empty(0), np.zeros(0, dtype=np.int64), np.empty(0), np.zeros(2, dtype=np.int64)
        else:
            e, (hc, hm, tl) = edges, hist
        _kernels.run_cells(ell, v, self.E, self.state, np.zeros(m, dtype=np.int64), ls, lc, nodes, self.E > 0,
                           e, hc, hm, tl, zout)
        return zout, int(nodes[0]), float(ell.sum())

    def burn(self, n):
        done = 0
        while done < n:
            m = min(CHUNK, n - done)
            self.run(m)
            done += m


def forward_orbit(spec, cfg: RiccatiOrbitConfig, rng, chunk: int = 1 << 16):
    """Generate ``(z, crossings)`` chunks of the forward chain after burn-in.

    `z` holds the Riccati variable just before each impurity; `crossings`
    counts the passages of Z through infinity (zeros of psi) during the
    chunk.
    """
    orb = _Orbit(spec, cfg, rng)
    orb.burn(cfg.burnin)
    done = 0
    while done < cfg.steps:
        m = min(chunk, cfg.steps - done)
        z, nodes, _ = orb.run(m, want_z=True)
        yield z, nodes
        done += m


def ergodic_omega(spec, cfg: RiccatiOrbitConfig, rng, batches: int = NBATCH) -> Estimate:
    """Average of Z along the forward chain.

    With Poisson impurities the chain samples the stationary law of Z in
    the continuous variable, whose mean is Omega for ``lam < 0``.
    """
    orb = _Orbit(spec, cfg, rng)
    orb.burn(cfg.burnin)
    n = int(cfg.steps)
    if n < batches:
        raise ValidationError("steps must be at least the number of batches")
    blen = n // batches
    sums = np.zeros(batches)
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        z, _, _ = orb.run(m, want_z=True)
        idx = np.minimum((done + np.arange(m)) // blen, batches - 1)
        sums += np.bincount(idx, weights=z, minlength=batches)
        done += m
    lengths = np.full(batches, blen)
    lengths[-1] = n - blen * (batches - 1)
    return batch_estimate(sums, lengths, getattr(rng, "seed", -1), orb.spec.tag)


def stationary_histogram(spec, cfg: RiccatiOrbitConfig, bins, rng) -> HistogramDensity:
    """Histogram of Z just before each impurity along the forward chain.

    `bins` is an array of edges or an even bin count (then
    `symmetric_edges` up to ``cfg.zmax_for(E)`` is used).
    """
    orb = _Orbit(spec, cfg, rng)
    edges = np.asarray(bins, dtype=float) if np.ndim(bins) else symmetric_edges(cfg.zmax_for(orb.E), int(bins))
    orb.burn(cfg.burnin)
    hc = np.zeros(edges.size - 1, dtype=np.int64)
    hm = np.zeros(edges.size - 1)
    tl = np.zeros(2, dtype=np.int64)
    done = 0
    while done < cfg.steps:
        m = min(CHUNK, cfg.steps - done)
        orb.run(m, edges, (hc, hm, tl))
        done += m
    h = HistogramDensity(edges, hc, int(cfg.steps), int(tl[0]), int(tl[1]), hm)
    if h.tail_mass > 0.05:
        warnings.warn(f"stationary_histogram: {h.tail_mass:.1%} of the samples fall outside the bins",
                      RuntimeWarning)
    return h


# ---------------------------------------------------------------------------
# backward limits


def _backward_compose(draw, size, tol, cap, what):
    """Limits of ``M_1 M_2 ... M_n`` acting on slopes, vectorized over samples.

    `draw(m)` returns entry arrays of m fresh matrices.  The composition is
    evaluated at 0 and at infinity; a sample is done when the two agree to
    `tol` (relative to ``1 + |z|``).
    """
    P = np.zeros((4, size))
    P[0] = 1.0
    P[3] = 1.0
    out = np.full(size, np.nan)
    active = np.arange(size)
    n = 0
    while active.size and n < cap:
        a, b, c, d = draw(active.size)
        p11, p12, p21, p22 = P[0, active], P[1, active], P[2, active], P[3, active]
        q11 = p11 * a + p12 * c
        q12 = p11 * b + p12 * d
        q21 = p21 * a + p22 * c
        q22 = p21 * b + p22 * d
        s = np.maximum.reduce([np.abs(q11), np.abs(q12), np.abs(q21), np.abs(q22)])
        P[:, active] = np.array([q11, q12, q21, q22]) / s
        n += 1
        with np.errstate(divide="ignore", invalid="ignore"):
            z0 = P[1, active] / P[3, active]  # image of 0
            zi = P[0, active] / P[2, active]  # image of infinity
        done = np.isfinite(z0) & np.isfinite(zi) & (np.abs(z0 - zi) <= tol * (1.0 + np.abs(z0)))
        out[active[done]] = 0.5 * (z0[done] + zi[done])
        active = active[~done]
    if active.size:
        raise NonConvergence(f"{what}: {active.size} of {size} samples did not converge within {cap} steps")
    return out


def backward_limit(spec, cfg: RiccatiOrbitConfig, rng, size: int = 1, *, tol: float = 1e-12,
                   cap: int = 100_000) -> np.ndarray:
    """Independent samples of ``Z_inf = lim A_1 o ... o A_n (z)``.

    The limit is taken from two starts (0 and infinity) and accepted when
    they agree.  For the Type-I string the composition is the continued
    fraction ``Y(t) = c_0 t/(1 + c_1 t/(1 + ...))`` with ``t = -1/lam`` and
    the returned value is ``-lam * Y``, the law of ``-w(lam)``.
    """
    spec = _with_param(spec, cfg.lam)
    gen = as_generator(rng)
    if isinstance(spec, DysonTypeI):
        if not spec.lam < 0:
            raise ValidationError("the Type-I continued fraction needs lam < 0")
        t = -1.0 / spec.lam

        def draw(m):
            ct = t * gen.gamma(spec.p, spec.q, m)
            return np.zeros(m), ct, np.ones(m), np.ones(m)

        return -spec.lam * _backward_compose(draw, int(size), tol, cap, "backward_limit")
    impurity_form(spec)
    return _backward_compose(lambda m: sample_matrices(spec, gen, m), int(size), tol, cap, "backward_limit")


def gig_fixed_point_samples(p: float, a: float, b: float, size: int, rng, *, tol: float = 1e-12,
                            cap: int = 100_000) -> np.ndarray:
    """Samples of the fixed point of ``X = 1/(G1 + 1/(G2 + X))``.

    ``G1 ~ Gamma(p, 2/b)`` and ``G2 ~ Gamma(p, 2/a)``; the law of X is
    GIG(-p, a, b).
    """
    if not (p > 0 and a > 0 and b > 0):
        raise ValidationError("p, a, b must be positive")
    gen = as_generator(rng)

    def draw(m):
        g1 = gen.gamma(p, 2.0 / b, m)
        g2 = gen.gamma(p, 2.0 / a, m)
        return np.ones(m), g2, g1, g1 * g2 + 1.0

    return _backward_compose(draw, int(size), tol, cap, "gig_fixed_point_samples")


# ---------------------------------------------------------------------------
# Dyson-Schmidt residual


def _sample_from_hist(hist: HistogramDensity, gen, size):
    """Draw from a histogram, uniform inside bins and ``1/z^2`` beyond the range."""
    w = np.concatenate([[hist.below], hist.counts, [hist.above]]).astype(float)
    w /= w.sum()
    k = gen.choice(w.size, size=size, p=w)
    u = gen.random(size)
    z = np.empty(size)
    mid = (k > 0) & (k < w.size - 1)
    i = k[mid] - 1
    z[mid] = hist.edges[i] + u[mid] * (hist.edges[i + 1] - hist.edges[i])
    lo, hi = hist.edges[0], hist.edges[-1]
    # density proportional to 1/z^2 on (-inf, lo) and (hi, inf); needs lo < 0 < hi
    z[k == 0] = lo / np.maximum(u[k == 0], 1e-300)
    z[k == w.size - 1] = hi / np.maximum(u[k == w.size - 1], 1e-300)
    return z


def dyson_schmidt_residual(hist: HistogramDensity, spec, rng, n: int = 2_000_000) -> float:
    """L1 distance between `hist` and its push-forward under one fresh cell.

    Samples are drawn from the histogram, mapped by independent cell
    matrices and re-binned; the two tail masses count as two extra bins.
    A stationary density gives a residual at the Monte-Carlo noise level.
    """
    gen = as_generator(rng)
    if (hist.below and hist.edges[0] >= 0) or (hist.above and hist.edges[-1] <= 0):
        raise ValidationError("tail mass needs a range that straddles the origin")
    z = _sample_from_hist(hist, gen, n)
    a, b, c, d = sample_matrices(spec, gen, n)
    zn = mobius_apply_array(a, b, c, d, z)
    pushed = HistogramDensity.from_samples(zn, hist.edges)
    p0 = np.concatenate([[hist.below], hist.counts, [hist.above]]) / hist.n
    p1 = np.concatenate([[pushed.below], pushed.counts, [pushed.above]]) / pushed.n
    return float(np.sum(np.abs(p1 - p0)))


# ---------------------------------------------------------------------------
# tail and principal-value estimators


def rice_ids(hist: HistogramDensity, *, decade: float = 10.0, spread: float = 0.2) -> float:
    """IDS from the tail coefficient ``N = lim z^2 f(z)``.

    In a tail bin ``[a, b]`` a density ``N/z^2`` has mass ``N (1/a - 1/b)``;
    mirror bins are pooled so that the ``1/z^3`` correction cancels.  The
    estimate is the median over the outer decade of the range, and
    `TailUnresolved` is raised if the inner and outer halves of that decade
    disagree by more than `spread`.
    """
    if not hist.is_symmetric():
        raise ValidationError("rice_ids needs mirror-symmetric bins")
    nb = hist.counts.size
    zmax = hist.edges[-1]
    right = np.arange(nb // 2, nb)
    a, b = hist.edges[right], hist.edges[right + 1]
    sel = a >= zmax / decade
    if np.count_nonzero(sel) < 4:
        raise TailUnresolved("fewer than 4 bins in the outer decade")
    left = nb - 1 - right
    mass = (hist.counts[right] + hist.counts[left]) / (2.0 * hist.n)
    est = mass[sel] / (1.0 / a[sel] - 1.0 / b[sel])
    h = est.size // 2
    inner, outer = np.median(est[:h]), np.median(est[h:])
    if not (inner > 0 and outer > 0) or abs(inner - outer) > spread * max(inner, outer):
        raise TailUnresolved(f"tail estimates {inner:.4g} (inner) and {outer:.4g} (outer) disagree")
    return float(np.median(est))


def pv_gamma(hist: HistogramDensity, cutoff: float | None = None) -> float:
    """Principal-value mean ``lim_c E[Z; |Z| < c]`` from a symmetric histogram.

    Bins are summed in mirror pairs, out to the largest pair inside
    ``[-cutoff, cutoff]`` (the full range by default), using the exact
    per-bin first moments.
    """
    if hist.moments is None:
        raise ValidationError("pv_gamma needs per-bin first moments")
    if not hist.is_symmetric():
        raise ValidationError("pv_gamma needs mirror-symmetric bins")
    c = hist.edges[-1] if cutoff is None else float(cutoff)
    inside = (hist.edges[:-1] >= -c - 1e-12 * c) & (hist.edges[1:] <= c + 1e-12 * c)
    inside &= inside[::-1]
    return float(hist.moments[inside].sum() / hist.n)


# ---------------------------------------------------------------------------
# white noise


@dataclass
class SDEResult:
    """Output of `sde_white_noise_run`."""

    N: Estimate
    gamma: Estimate
    hist: HistogramDensity | None
    crossings: int
    time: float
    big_moves: int
    steps: int
    extra: dict = field(default_factory=dict)


def max_step(E: float) -> float:
    return 1e-3 * min(1.0, 1.0 / math.sqrt(abs(E) + 1.0))


def sde_white_noise_run(E: float, sigma: float, L: float, dt: float | None = None,
                        cfg: RiccatiOrbitConfig | None = None, rng=0, *, bins=None,
                        batches: int = NBATCH, z0: float | None = None) -> SDEResult:
    """Euler-Maruyama run of the white-noise Riccati SDE over length `L`.

    Each escape below ``-Z_max`` is a zero of psi; Z restarts at
    ``+Z_max``.  The deterministic transit time beyond ``+-Z_max``
    (``~ 2/Z_max``) is added to each escape, removing the leading bias
    of the truncation.  ``N`` is escapes per unit length and ``gamma`` is
    the time average of Z over the kept range, whose symmetric truncation
    is the principal value.
    """
    if not sigma > 0:
        raise ValidationError("sigma must be positive")
    dt = max_step(E) if dt is None else float(dt)
    if not 0 < dt <= max_step(E) * (1 + 1e-12):
        raise ValidationError(f"dt={dt} exceeds the stable step {max_step(E):.3g}")
    cfg = cfg or RiccatiOrbitConfig()
    zmax = cfg.zmax_for(E)
    t_re = _transit_time(zmax, E)
    gen = as_generator(rng)
    edges = np.asarray(bins, dtype=float) if bins is not None and np.ndim(bins) else (
        symmetric_edges(zmax, int(bins)) if bins is not None else np.empty(0))
    nbins = max(edges.size - 1, 0)
    if nbins and edges[-1] - edges[-2] < edges[-1] ** 2 * dt:
        # samples near +-Z_max sit on the nearly deterministic Euler ladder and alias onto narrow bins
        warnings.warn("sde_white_noise_run: outer bins are narrower than one Euler step near Z_max; "
                      "tail densities will alias, use fewer bins", RuntimeWarning)
    hc = np.zeros(nbins, dtype=np.int64)
    hm = np.zeros(nbins)
    tl = np.zeros(2, dtype=np.int64)
    nsteps = int(round(L / dt))
    if nsteps < batches:
        raise ValidationError("L/dt must exceed the number of batches")
    per = nsteps // batches
    z = cfg.z0 if z0 is None else z0
    cross = np.zeros(batches)
    zint = np.zeros(batches)
    times = np.zeros(batches)
    big = 0
    dummy = np.zeros(0)
    for bi in range(batches):
        m = per if bi < batches - 1 else nsteps - per * (batches - 1)
        z, c, zi, bg, _, _ = _kernels.sde_euler(gen, float(z), float(E), float(sigma), dt, m, zmax,
                                               edges, hc, hm, tl, dummy, 0, t_re)
        cross[bi] = c
        zint[bi] = zi
        times[bi] = m * dt + c * t_re
        big += bg
    if big > 1e-3 * nsteps:
        raise StepTooLarge(f"{big} of {nsteps} steps moved Z by more than Z_max/2; reduce dt")
    hist = HistogramDensity(edges, hc, nsteps, int(tl[0]), int(tl[1]), hm) if nbins else None
    seed = getattr(rng, "seed", -1)
    return SDEResult(batch_estimate(cross, times, seed, "white-noise"), batch_estimate(zint, times, seed, "white-noise"),
                     hist, int(cross.sum()), float(times.sum()), big, nsteps,
                     {"zmax": zmax, "dt": dt, "transit": t_re})


def _transit_time(zmax, E):
    """Time for ``z' = -(z^2 + E)`` to go from ``+inf`` to ``+zmax`` plus ``-zmax`` to ``-inf``."""
    if E == 0:
        return 2.0 / zmax
    if E > 0:
        k = math.sqrt(E)
        return 2.0 * math.atan(k / zmax) / k
    k = math.sqrt(-E)
    return 2.0 * math.atanh(k / zmax) / k if zmax > k else math.inf


@dataclass
class FirstPassage:
    """Escape times from ``+Z_max`` to ``-Z_max`` and level counts."""

    taus: np.ndarray
    window: float
    counts: np.ndarray
    N_ref: float | None = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.taus))

    @property
    def stderr(self) -> float:
        return float(np.std(self.taus, ddof=1) / math.sqrt(self.taus.size))

    def cdf(self, t):
        s = np.sort(self.taus)
        return np.searchsorted(s, np.asarray(t), side="right") / s.size

    def count_table(self) -> dict:
        vals, cnt = np.unique(self.counts, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["tau"])
            for t in self.taus:
                wr.writerow([repr(float(t))])


def first_passage_stats(E: float, sigma: float, samples: int, rng, *, dt: float | None = None,
                        cfg: RiccatiOrbitConfig | None = None, window: float | None = None,
                        chunk_steps: int = 1 << 22) -> FirstPassage:
    """Escape times of the white-noise Riccati process started at ``+Z_max``.

    Successive escapes of one long run are independent copies of the first
    escape time (the process restarts at ``+Z_max``).  The number of
    escapes in consecutive windows of length `window` (default ``3/N`` with
    N from the sample mean) is the level count of a sample of that length.
    """
    dt = max_step(E) if dt is None else float(dt)
    if not 0 < dt <= max_step(E) * (1 + 1e-12):
        raise ValidationError(f"dt={dt} exceeds the stable step {max_step(E):.3g}")
    cfg = cfg or RiccatiOrbitConfig()
    zmax = cfg.zmax_for(E)
    t_re = _transit_time(zmax, E)
    gen = as_generator(rng)
    taus = np.zeros(int(samples))
    got = 0
    z = zmax
    carry = 0.0
    e = np.empty(0)
    big = steps = 0
    while got < samples:
        buf = np.zeros(samples - got)
        z, c, _, bg, npass, tlast = _kernels.sde_euler(gen, float(z), float(E), float(sigma), dt, chunk_steps, zmax,
                                                      e, np.zeros(0, dtype=np.int64), e, np.zeros(2, dtype=np.int64),
                                                      buf, buf.size, t_re)
        if npass:
            buf[0] += carry
            taus[got:got + npass] = buf[:npass]
            got += npass
            carry = tlast
        else:
            carry += tlast
        big += bg
        steps += chunk_steps
    if big > 1e-3 * steps:
        raise StepTooLarge(f"{big} of {steps} steps moved Z by more than Z_max/2; reduce dt")
    if window is None:
        window = 3.0 * float(np.mean(taus))
    t = np.cumsum(taus)
    nwin = int(t[-1] // window)
    counts = np.bincount((t[t < nwin * window] // window).astype(np.int64), minlength=nwin)
    return FirstPassage(taus, float(window), counts)
