r"""Ising chain in a frozen random field.

With ``H = -J sum s_j s_{j+1} - sum h_j s_j`` the conditioned partition
functions obey ``(Z_j^+, Z_j^-) = A_j (Z_{j-1}^+, Z_{j-1}^-)`` with

.. math::  A_j = \begin{pmatrix} e^{\beta(J+h_j)} & e^{\beta(-J+h_j)} \\
                 e^{\beta(-J-h_j)} & e^{\beta(J-h_j)} \end{pmatrix},

and the periodic chain has ``Z_n = Tr A_n ... A_1``.  Products are
renormalized as they are built, so ``Z_n`` is carried as a mantissa and
the log of a scale.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .ensembles import IsingChain, RandomStream
from .errors import ValidationError
from .parallel import map_replicas


@dataclass(frozen=True)
class LogValue:
    """A positive number ``mantissa * exp(log_scale)``."""

    mantissa: float
    log_scale: float

    @property
    def log(self) -> float:
        return math.log(self.mantissa) + self.log_scale

    def __float__(self) -> float:
        return math.exp(self.log)


def transfer_entries(fields, beta: float, J: float):
    """Entry arrays ``(a, b, c, d)`` of the transfer matrices ``A_j``."""
    h = np.asarray(fields, dtype=float)
    bJ = beta * J
    return np.exp(beta * (J + h)), np.exp(beta * (-J + h)), np.exp(-bJ - beta * h), np.exp(bJ - beta * h)


def partition_function(fields, beta: float, J: float, *, boundary: str = "periodic") -> LogValue:
    """Partition function of the chain with local fields `fields`.

    ``boundary="periodic"`` gives ``Tr A_n ... A_1``; ``"open"`` drops the
    bond between the last and the first spin.
    """
    h = np.ascontiguousarray(fields, dtype=float)
    if h.ndim != 1 or h.size == 0:
        raise ValidationError("need a nonempty 1-d array of fields")
    if not (math.isfinite(beta) and math.isfinite(J) and np.all(np.isfinite(h))):
        raise ValidationError("beta, J and the fields must be finite")
    a, b, c, d = transfer_entries(h, beta, J)
    sums, comps = np.zeros(1), np.zeros(1)
    if boundary == "periodic":
        P = np.array([1.0, 0.0, 0.0, 1.0])
        _kernels.telescope_frobenius(a, b, c, d, P, 0, h.size + 1, sums, comps)
        return LogValue(float(P[0] + P[3]), float(sums[0] + comps[0]))
    if boundary == "open":
        u = np.array([math.exp(beta * h[0]), math.exp(-beta * h[0])])
        r = math.hypot(u[0], u[1])
        u /= r
        if h.size > 1:
            _kernels.telescope(a[1:], b[1:], c[1:], d[1:], u, 0, h.size + 1, sums, comps, 1)
        return LogValue(float(u[0] + u[1]), float(math.log(r) + sums[0] + comps[0]))
    raise ValidationError("boundary must be 'periodic' or 'open'")


def brute_force_partition(fields, beta: float, J: float, *, boundary: str = "periodic") -> float:
    """Direct sum of ``exp(-beta H)`` over all ``2^n`` spin configurations."""
    h = np.asarray(fields, dtype=float)
    n = h.size
    if n > 20:
        raise ValidationError("brute force is limited to n <= 20 spins")
    s = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    bonds = np.sum(s[:, :-1] * s[:, 1:], axis=1)
    if boundary == "periodic":
        bonds = bonds + s[:, -1] * s[:, 0]
    elif boundary != "open":
        raise ValidationError("boundary must be 'periodic' or 'open'")
    energy = -J * bonds - s @ h
    return float(np.sum(np.exp(-beta * energy)))


def top_eigenvalue(beta: float, J: float, h: float) -> float:
    """Largest eigenvalue of the uniform-field transfer matrix."""
    bJ, bh = beta * J, beta * h
    return math.exp(bJ) * math.cosh(bh) + math.sqrt(math.exp(2 * bJ) * math.sinh(bh) ** 2 + math.exp(-2 * bJ))


@dataclass
class IsingResult:
    """Free energy per spin over independent field realizations."""

    n: int
    beta: float
    J: float
    free_energy_density: float
    stderr: float
    replicas: int
    seed: int = -1
    values: np.ndarray = field(default=None, repr=False)

    @property
    def spread(self) -> float:
        """Standard deviation of the per-realization free energy."""
        return float(np.std(self.values, ddof=1))

    def to_dict(self) -> dict:
        return {"n": self.n, "beta": self.beta, "J": self.J, "free_energy_density": self.free_energy_density,
                "stderr": self.stderr, "replicas": self.replicas, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _one_chain(args):
    spec, stream, n = args
    h = spec.field.sample(stream.generator, n)
    return -partition_function(h, spec.beta, spec.J).log / (spec.beta * n)


def free_energy_density(spec: IsingChain, n: int, replicas: int, rng, *, workers=None) -> IsingResult:
    """``-(1/(beta n)) ln Z_n`` for `replicas` independent field draws."""
    if not isinstance(spec, IsingChain):
        raise ValidationError("free_energy_density needs an IsingChain spec")
    n = int(n)
    if n < 1000:
        raise ValidationError("free_energy_density needs n >= 1e3")
    if replicas < 2:
        raise ValidationError("need at least two replicas for a standard error")
    root = rng if isinstance(rng, RandomStream) else RandomStream(int(rng))
    vals = np.array(map_replicas(_one_chain, [(spec, root.child(r), n) for r in range(replicas)], workers))
    return IsingResult(n, spec.beta, spec.J, float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(replicas)),
                       int(replicas), root.seed, vals)


@dataclass(frozen=True)
class DoublingTest:
    """Ratio of free-energy spreads at ``2n`` and ``n``, expected ``1/sqrt(2)``."""

    ratio: float
    ratio_stderr: float

    @property
    def zscore(self) -> float:
        return abs(self.ratio - 1.0 / math.sqrt(2.0)) / self.ratio_stderr


def self_averaging_doubling(spec: IsingChain, n: int, replicas: int, rng, *, workers=None) -> DoublingTest:
    """Compare the spread of the free energy per spin at `n` and ``2n`` spins.

    The spread of a sample standard deviation over ``R`` normal draws is
    about ``s/sqrt(2(R-1))``, which gives the error of the ratio.
    """
    root = rng if isinstance(rng, RandomStream) else RandomStream(int(rng))
    r1 = free_energy_density(spec, n, replicas, root.child(0), workers=workers)
    r2 = free_energy_density(spec, 2 * n, replicas, root.child(1), workers=workers)
    ratio = r2.spread / r1.spread
    rel = math.sqrt(2.0 / (2.0 * (replicas - 1)))
    return DoublingTest(float(ratio), float(ratio * rel))
