r"""Transfer-matrix propagation of impurity-model wavefunctions.

A realization is a sequence of cells ``(ell_j, w_j)``: an impurity of weight
``w_j`` at the left end followed by a free segment of length ``ell_j``.
Row 0 carries ``w_0 = 0`` so that the first impurity sits at ``x_1 = ell_0``.
For strings the weight is a mass and the kick on :math:`\psi'` is
``-lam * m``; for delta potentials the weight is the coupling itself.

Zeros of :math:`\psi` are counted along the way (Sturm), which gives the
integrated density of states, and the log of the state norm gives the
Lyapunov exponent; together they form the complex exponent
:math:`\Omega = \gamma - i\pi N`.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .ensembles import (DysonString, DysonTypeI, FrischLloyd, KronigPenney, RandomStream, impurity_form,
                        type_i_weights)
from .errors import PoleHit, ValidationError
from .lyapunov import Estimate, batch_estimate
from .parallel import map_replicas

CHUNK = 1 << 20
NBATCH = 32


@dataclass(frozen=True)
class BoundaryData:
    """Left boundary angle ``alpha`` and right boundary slope ``z_R``.

    ``alpha = pi/2`` is Dirichlet at the origin; ``z_R = inf`` is Dirichlet
    at ``L``.
    """

    alpha: float = math.pi / 2
    z_R: float = math.inf

    def __post_init__(self):
        if not 0.0 <= self.alpha < math.pi:
            raise ValidationError("alpha must lie in [0, pi)")


@dataclass
class Realization:
    """Cells ``(ell_j, w_j)``; `kind` is ``"mass"`` (strings) or ``"coupling"``."""

    spacings: np.ndarray
    weights: np.ndarray
    kind: str = "coupling"

    def __post_init__(self):
        self.spacings = np.asarray(self.spacings, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.spacings.shape != self.weights.shape or self.spacings.ndim != 1:
            raise ValidationError("spacings and weights must be 1-d arrays of equal length")
        if self.kind not in ("mass", "coupling"):
            raise ValidationError("kind must be 'mass' or 'coupling'")
        if np.any(self.spacings <= 0):
            raise ValidationError("spacings must be positive")
        if self.kind == "mass" and np.any(self.weights[1:] <= 0):
            raise ValidationError("string masses must be positive")

    @property
    def L(self) -> float:
        return float(math.fsum(self.spacings))

    @property
    def n(self) -> int:
        """Number of impurities (cells after the first)."""
        return self.spacings.size - 1

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["ell", "mass" if self.kind == "mass" else "coupling"])
            for a, b in zip(self.spacings, self.weights):
                wr.writerow([repr(float(a)), repr(float(b))])

    @classmethod
    def from_csv(cls, path) -> "Realization":
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            head = next(rd)
            rows = [(float(a), float(b)) for a, b in rd]
        kind = "mass" if head[1] == "mass" else "coupling"
        arr = np.array(rows, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], kind)


def with_energy(spec, lam):
    """Copy of `spec` with its spectral parameter replaced (``lam`` or ``E``)."""
    if lam is None:
        return spec
    if isinstance(spec, (DysonString, DysonTypeI)):
        return dataclasses.replace(spec, lam=float(lam))
    if isinstance(spec, (FrischLloyd, KronigPenney)):
        return dataclasses.replace(spec, E=float(lam))
    raise ValidationError(f"{spec.tag} has no spectral parameter")


def spectral_parameter(spec) -> float:
    return spec.lam if isinstance(spec, (DysonString, DysonTypeI)) else spec.E


def _draw_cells(spec, gen, L):
    """Yield ``(ell, weight)`` chunks of a realization of total length `L`."""
    _, spacing, kick, _ = impurity_form(spec)
    total = 0.0
    first = True
    while total < L:
        m = max(16, min(CHUNK, int(1.2 * (L - total) / max(spacing.mean(), 1e-300)) + 16))
        ell = spacing.sample(gen, m)
        w = kick.sample(gen, m)
        if first:
            w[0] = 0.0
            first = False
        cs = total + np.cumsum(ell)
        stop = int(np.searchsorted(cs, L, side="left"))
        if stop < m:
            ell = ell[: stop + 1].copy()
            w = w[: stop + 1]
            ell[-1] = L - (cs[stop - 1] if stop > 0 else total)
            yield ell, w
            return
        total = float(cs[-1])
        yield ell, w


def sample_realization(spec, rng, L: float | None = None, n: int | None = None) -> Realization:
    """Draw a realization of length `L` (or with `n` impurities).

    The last spacing is cut so that the cells add up to `L` exactly.  The
    Type-I string is only available by impurity count.
    """
    gen = rng.generator if isinstance(rng, RandomStream) else np.random.default_rng(rng)
    if isinstance(spec, DysonTypeI):
        if n is None:
            raise ValidationError("the Type-I string is sampled by impurity count n")
        c = gen.gamma(spec.p, spec.q, 2 * n + 1)
        ell, m = type_i_weights(c)
        m[0] = 0.0
        return Realization(ell, m, "mass")
    kind = "mass" if isinstance(spec, DysonString) else "coupling"
    if n is not None:
        _, spacing, kick, _ = impurity_form(spec)
        ell = spacing.sample(gen, n + 1)
        w = kick.sample(gen, n + 1)
        w[0] = 0.0
        return Realization(ell, w, kind)
    if L is None or not L > 0:
        raise ValidationError("give a positive length L or an impurity count n")
    parts = list(_draw_cells(spec, gen, float(L)))
    return Realization(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]), kind)


# ---------------------------------------------------------------------------
# propagation


@dataclass(frozen=True)
class Propagated:
    """``(psi'(L-), psi(L))`` as a unit vector times ``exp(log_scale)``, with the zero count."""

    dpsi: float
    psi: float
    log_scale: float
    nodes: int

    @property
    def slope(self) -> float:
        return self.dpsi / self.psi if self.psi != 0 else math.inf

    def values(self) -> tuple[float, float]:
        s = math.exp(self.log_scale)
        return self.dpsi * s, self.psi * s


def _initial_state(alpha):
    sa, ca = math.sin(alpha), math.cos(alpha)
    if abs(ca) > 1e-15:
        s0 = 1.0 if ca > 0 else -1.0
    else:
        s0 = 1.0  # psi(0) = 0 and psi' = 1: psi is positive just to the right
    return np.array([sa, ca, s0])


def _free_energy_and_kicks(real: Realization, lam: float):
    if real.kind == "mass":
        return 0.0, -lam * real.weights
    return float(lam), real.weights


def _empty():
    return np.empty(0)


def propagate(real: Realization, lam: float, bc: BoundaryData = BoundaryData(), method: str = "auto") -> Propagated:
    """Propagate from ``(psi'(0), psi(0)) = (sin alpha, cos alpha)`` to ``x = L``.

    Zeros of psi on (0, L] are counted by the Pruefer phase when the free
    energy is positive (`method` ``"prufer"``), otherwise by sign changes
    at the cell ends (``"sign"``); ``"auto"`` picks Pruefer exactly when it
    is needed.
    """
    E, v = _free_energy_and_kicks(real, float(lam))
    if method == "auto":
        method = "prufer" if E > 0 else "sign"
    if method not in ("prufer", "sign"):
        raise ValidationError(f"unknown node-counting method {method!r}")
    state = _initial_state(bc.alpha)
    bidx = np.zeros(real.spacings.size, dtype=np.int64)
    ls, lc, nodes = np.zeros(1), np.zeros(1), np.zeros(1, dtype=np.int64)
    _kernels.run_cells(real.spacings, np.ascontiguousarray(v, dtype=float), E, state, bidx, ls, lc, nodes,
                       method == "prufer", _empty(), np.zeros(0, dtype=np.int64), _empty(), np.zeros(2, dtype=np.int64),
                       _empty())
    return Propagated(float(state[0]), float(state[1]), float(ls[0] + lc[0]), int(nodes[0]))


def _run_replica(spec, stream, L, alpha, nb):
    gen = stream.generator
    E, _, _, scale = impurity_form(spec)
    use_prufer = E > 0
    state = _initial_state(alpha)
    lsums, lcomps = np.zeros(nb), np.zeros(nb)
    nodes = np.zeros(nb, dtype=np.int64)
    lengths = np.zeros(nb)
    width = L / nb
    x0 = 0.0
    for ell, w in _draw_cells(spec, gen, L):
        x = x0 + np.cumsum(ell)
        # a cell belongs to the batch containing its right end
        bidx = np.minimum((x / width).astype(np.int64), nb - 1)
        bidx = np.maximum(bidx, 0)
        np.add.at(lengths, bidx, ell)
        _kernels.run_cells(ell, scale * w, E, state, bidx, lsums, lcomps, nodes, use_prufer,
                           _empty(), np.zeros(0, dtype=np.int64), _empty(), np.zeros(2, dtype=np.int64), _empty())
        x0 = float(x[-1])
    return lsums + lcomps, nodes.astype(float), lengths


def _replicas(spec, lam, L, replicas, rng, alpha, workers):
    spec = with_energy(spec, lam)
    if isinstance(spec, DysonTypeI):
        raise ValidationError("the Type-I string has dependent cells; use riccati.backward_limit")
    impurity_form(spec)
    if not L > 0:
        raise ValidationError("L must be positive")
    root = rng if isinstance(rng, RandomStream) else RandomStream(int(rng))
    replicas = int(replicas)
    if replicas < 1:
        raise ValidationError("replicas must be >= 1")
    nb = -(-NBATCH // replicas)  # at least 32 batches in total
    streams = [root.child(r) for r in range(replicas)]
    res = map_replicas(lambda st: _run_replica(spec, st, float(L), alpha, nb), streams, workers)
    logs = np.concatenate([r[0] for r in res])
    nodes = np.concatenate([r[1] for r in res])
    lens = np.concatenate([r[2] for r in res])
    return spec, root, logs, nodes, lens


def ids_node_counting(spec, lam=None, L: float = 1e4, replicas: int = 1, rng=0, *, alpha: float = math.pi / 2,
                      workers=None) -> Estimate:
    """Integrated density of states as zeros of psi per unit length.

    Each replica is a realization of length `L`, cut into batches by
    position; the standard error comes from the batch means.
    """
    spec, root, _, nodes, lens = _replicas(spec, lam, L, replicas, rng, alpha, workers)
    return batch_estimate(nodes, lens, root.seed, spec.tag)


@dataclass
class ComplexEstimate:
    """``Omega = gamma - i pi N`` with separate estimates of both parts."""

    gamma: Estimate
    N: Estimate

    @property
    def value(self) -> complex:
        return complex(self.gamma.value, -math.pi * self.N.value)

    @property
    def stderr(self) -> complex:
        return complex(self.gamma.stderr, math.pi * self.N.stderr)

    def to_dict(self) -> dict:
        return {"re": self.gamma.to_dict(), "im": -math.pi * self.N.value, "N": self.N.to_dict()}


def complex_lyapunov(spec, lam=None, L: float = 1e4, replicas: int = 1, rng=0, *, alpha: float = math.pi / 2,
                     workers=None) -> ComplexEstimate:
    """Complex Lyapunov exponent on the ``lam + i0`` branch.

    The real part is the growth rate of the state vector ``(psi', psi)``;
    the imaginary part is ``-pi`` times the zero density.
    """
    spec, root, logs, nodes, lens = _replicas(spec, lam, L, replicas, rng, alpha, workers)
    return ComplexEstimate(batch_estimate(logs, lens, root.seed, spec.tag),
                           batch_estimate(nodes, lens, root.seed, spec.tag))


# ---------------------------------------------------------------------------
# Weyl coefficient


def _scaled_free_block(E: complex, ell: np.ndarray):
    """Free propagator entries times ``exp(-|Im k ell|)``, safe for long cells.

    The common factor drops out of the projective (slope) recursion.
    """
    k = np.sqrt(complex(E))
    z = k * ell
    t = np.abs(z.imag)
    big = t > 1.0
    c = np.empty(ell.shape, dtype=complex)
    sk = np.empty(ell.shape, dtype=complex)
    small = ~big
    if np.any(small):
        c[small] = np.cos(z[small]) * np.exp(-t[small])
        sk[small] = ell[small] * np.sinc(z[small] / np.pi) * np.exp(-t[small])
    if np.any(big):
        ep = np.exp(1j * z[big] - t[big])
        em = np.exp(-1j * z[big] - t[big])
        c[big] = 0.5 * (ep + em)
        sk[big] = (ep - em) / (2j * k)
    return c, -complex(E) * sk, sk, c



def weyl_cf_truncated(real: Realization, lam: complex, bc: BoundaryData = BoundaryData(), *,
                      pole_tol: float = 1e-13) -> complex:
    """Weyl coefficient of the problem truncated at ``L`` with ``psi'(L-) = z_R psi(L)``.

    The slope ``Z = chi'/chi`` is carried backward from ``z_R`` through the
    inverse cell maps (the finite continued fraction, evaluated from its
    innermost level), and ``Z(0)`` is mapped to ``w`` through the boundary
    angle.  Slopes are kept as projective pairs so that ``inf`` is an
    ordinary value.
    """
    lam = complex(lam)
    if lam.imag < 0:
        raise ValidationError("use Im lam >= 0")
    if real.kind == "mass":
        E, v = 0j, -lam * real.weights.astype(complex)
    else:
        E, v = lam, real.weights.astype(complex)
    f11, f12, f21, f22 = _scaled_free_block(complex(E), real.spacings)
    if math.isinf(bc.z_R):
        u, w = 1.0 + 0j, 0.0 + 0j
    else:
        u, w = complex(bc.z_R), 1.0 + 0j
    for j in range(real.spacings.size - 1, -1, -1):
        # inverse free block (det 1): [[f22, -f12], [-f21, f11]]
        u, w = f22[j] * u - f12[j] * w, -f21[j] * u + f11[j] * w
        # inverse kick: slope - v
        u = u - v[j] * w
        r = math.hypot(abs(u), abs(w))
        u, w = u / r, w / r
    sa, ca = math.sin(bc.alpha), math.cos(bc.alpha)
    num = u * sa + w * ca
    den = w * sa - u * ca
    if abs(den) <= pole_tol * (abs(num) + abs(den)):
        raise PoleHit(f"weyl_cf_truncated: lam={lam} is an eigenvalue of the truncated problem")
    return num / den


@dataclass
class StieltjesResult:
    lam: np.ndarray
    density: np.ndarray

    def measure(self, lo: float, hi: float) -> float:
        """``sigma(hi) - sigma(lo)`` by the trapezoid rule on the grid."""
        m = (self.lam >= lo) & (self.lam <= hi)
        return float(np.trapezoid(self.density[m], self.lam[m]))


def stieltjes_inversion(w, lam_grid, eps: float = 1e-3, *, tol: float = 0.05) -> StieltjesResult:
    """Spectral density ``(1/pi) Im w(lam + i eps)`` on a grid.

    `w` is either a callable of a complex argument or an array of values
    already evaluated at ``lam_grid + i eps``.  With a callable the result
    is compared with the one at ``eps/2`` and a warning is issued if they
    differ by more than `tol` relative to the peak density.
    """
    lam_grid = np.asarray(lam_grid, dtype=float)
    if not eps > 0:
        raise ValidationError("eps must be positive")
    if callable(w):
        vals = np.array([w(complex(x, eps)) for x in lam_grid])
        half = np.array([w(complex(x, eps / 2)) for x in lam_grid]).imag / math.pi
        dens = vals.imag / math.pi
        scale = max(float(np.max(np.abs(dens))), 1e-300)
        if np.max(np.abs(dens - half)) > tol * scale:
            warnings.warn("stieltjes_inversion: halving eps changes the density by more than "
                          f"{tol:.0%}; the grid or eps does not resolve it", RuntimeWarning)
    else:
        vals = np.asarray(w, dtype=complex)
        if vals.shape != lam_grid.shape:
            raise ValidationError("w values must match the grid")
        dens = vals.imag / math.pi
    return StieltjesResult(lam_grid, dens)
