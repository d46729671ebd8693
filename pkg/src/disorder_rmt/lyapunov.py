r"""Lyapunov exponents of products of random 2x2 matrices.

Two estimators are provided.  The telescopic estimator follows a unit
vector :math:`u_j` and averages :math:`\ln|A_j u_{j-1}|`.  The Furstenberg
estimator pairs states of the projective chain with *fresh* matrix draws,

.. math::  \gamma = \mathbb{E}\, \ln \frac{|A\,(z, 1)^T|}{|(z, 1)^T|},

with :math:`z` distributed according to the stationary measure.  A bounded
fixed-point search tests strong irreducibility of finitely supported laws.
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .algebra import Matrix2, ProjectivePoint
from .ensembles import DysonTypeI, EnsembleSpec, RandomStream, sample_matrices
from .errors import DivergenceError, ValidationError
from .parallel import map_replicas

NBATCH = 32
CHUNK = 1 << 20


@dataclass
class Estimate:
    """Monte-Carlo estimate with a batch-means standard error."""

    value: float
    stderr: float
    n: int
    seed: int = -1
    model: str | None = None
    batch_means: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "n": self.n, "seed": self.seed, "model": self.model}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def zscore(self, target: float, extra_sd: float = 0.0) -> float:
        """``|value - target|`` in units of the (joint) standard error."""
        sd = math.hypot(self.stderr, extra_sd)
        diff = abs(self.value - target)
        if sd == 0.0:
            return 0.0 if diff == 0.0 else math.inf
        return diff / sd


def batch_estimate(sums, lengths, seed=-1, model=None) -> Estimate:
    """Pool per-batch sums and sample counts into an `Estimate`."""
    sums = np.asarray(sums, dtype=float).ravel()
    lengths = np.asarray(lengths, dtype=float).ravel()
    keep = lengths > 0
    sums, lengths = sums[keep], lengths[keep]
    if sums.size < 2:
        raise ValidationError("need at least two batches for a standard error")
    means = sums / lengths
    total = float(lengths.sum())
    value = float(sums.sum() / total)
    # ratio-estimator form of batch means; equals std/sqrt(B) for equal batches
    w = lengths / lengths.mean()
    var = np.sum((w * (means - value)) ** 2) / (means.size - 1) / means.size
    return Estimate(value, float(math.sqrt(var)), int(total), seed, model, means)


def _stream_of(rng):
    if isinstance(rng, RandomStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RandomStream(int(rng))
    raise ValidationError("Lyapunov estimators need a RandomStream or an integer seed")


def _replica_streams(rng, replicas):
    st = _stream_of(rng)
    if replicas == 1:
        return st, [st]
    return st, [st.child(r) for r in range(replicas)]


def _initial_vector(u0):
    if u0 is None:
        return np.array([1.0, 0.0])
    if isinstance(u0, ProjectivePoint):
        return np.array([u0.u0, u0.u1])
    if np.ndim(u0) == 0:
        p = ProjectivePoint.from_slope(float(u0))
        return np.array([p.u0, p.u1])
    v = np.asarray(u0, dtype=float)
    return v / np.hypot(v[0], v[1])


def _check_iid(spec):
    if isinstance(spec, DysonTypeI):
        raise ValidationError("the Type-I string has dependent cells; use the spectral estimators")


def _norm_growth_one(spec, stream, n, burnin, u0, every, norm, batches):
    gen = stream.generator
    u = _initial_vector(u0)
    P = np.array([1.0, 0.0, 0.0, 1.0])
    scratch_s, scratch_c = np.zeros(1), np.zeros(1)
    done = 0
    while done < burnin:
        m = min(CHUNK, burnin - done)
        a, b, c, d = sample_matrices(spec, gen, m)
        if norm == "frobenius":
            rc = _kernels.telescope_frobenius(a, b, c, d, P, 0, m + 1, scratch_s, scratch_c)
        else:
            rc = _kernels.telescope(a, b, c, d, u, 0, m + 1, scratch_s, scratch_c, 1)
        if rc:
            raise DivergenceError(f"gamma_norm_growth: degenerate norm at burn-in step {done + rc - 1}")
        done += m
    sums = np.zeros(batches)
    comps = np.zeros(batches)
    blen = n // batches
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        a, b, c, d = sample_matrices(spec, gen, m)
        if norm == "frobenius":
            rc = _kernels.telescope_frobenius(a, b, c, d, P, done, blen, sums, comps)
        else:
            rc = _kernels.telescope(a, b, c, d, u, done, blen, sums, comps, every)
        if rc:
            raise DivergenceError(f"gamma_norm_growth: zero or non-finite |A u| at step {done + rc - 1}")
        done += m
    lengths = np.full(batches, blen)
    lengths[-1] = n - blen * (batches - 1)
    return sums + comps, lengths


def gamma_norm_growth(spec: EnsembleSpec, n: int, rng, *, burnin: int = 1000, u0=None, every: int = 1,
                      norm: str = "vector", batches: int = NBATCH, replicas: int = 1,
                      workers=None) -> Estimate:
    """Telescopic estimate of the top Lyapunov exponent.

    Parameters
    ----------
    spec : EnsembleSpec
        Matrix law (i.i.d. cells).
    n : int
        Number of matrix factors after burn-in (per replica).
    rng : RandomStream or int
        Stream; replicas use independent child streams.
    burnin : int
        Factors applied before accumulation starts, letting the direction
        relax to the stationary measure.
    u0 : optional
        Initial direction (slope, ProjectivePoint or vector).
    every : int
        Renormalize the running vector every `every` steps.
    norm : {"vector", "frobenius"}
        Follow a vector, or the Frobenius norm of the full product.
    """
    _check_iid(spec)
    n = int(n)
    if n < 10_000:
        raise ValidationError("gamma_norm_growth needs n >= 1e4")
    if norm not in ("vector", "frobenius"):
        raise ValidationError(f"unknown norm {norm!r}")
    if batches < 20:
        raise ValidationError("at least 20 batches are required")
    root, streams = _replica_streams(rng, int(replicas))
    res = map_replicas(lambda st: _norm_growth_one(spec, st, n, int(burnin), u0, int(every), norm, batches),
                       streams, workers)
    sums = np.concatenate([r[0] for r in res])
    lens = np.concatenate([r[1] for r in res])
    return batch_estimate(sums, lens, root.seed, spec.tag)


def gamma_furstenberg(spec: EnsembleSpec, burnin: int, n: int, rng, *, z0=None,
                      batches: int = NBATCH) -> Estimate:
    """Furstenberg-formula estimate of the Lyapunov exponent.

    The projective chain driven by one sequence of draws supplies states
    ``z_j``; an independent sequence of draws ``A'_j`` is used to evaluate
    ``ln |A'_j (z_j, 1)| / |(z_j, 1)|``.
    """
    _check_iid(spec)
    st = _stream_of(rng)
    gen_chain = st.child(0).generator
    gen_fresh = st.child(1).generator
    u = _initial_vector(z0)
    done = 0
    while done < burnin:
        m = min(CHUNK, burnin - done)
        a, b, c, d = sample_matrices(spec, gen_chain, m)
        _kernels.projective_chain(a, b, c, d, u, np.empty(0), np.empty(0))
        done += m
    n = int(n)
    if n < batches:
        raise ValidationError("n must be at least the number of batches")
    blen = n // batches
    sums = np.zeros(batches)
    atoms = set()
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        a, b, c, d = sample_matrices(spec, gen_chain, m)
        x0 = np.empty(m)
        x1 = np.empty(m)
        _kernels.projective_chain(a, b, c, d, u, x0, x1)
        if len(atoms) < 3:
            atoms.update(np.round(np.arctan2(x1[:1000], x0[:1000]) % math.pi, 9).tolist())
        fa, fb, fc, fd = sample_matrices(spec, gen_fresh, m)
        y = 0.5 * np.log((fa * x0 + fb * x1) ** 2 + (fc * x0 + fd * x1) ** 2)
        idx = np.minimum((done + np.arange(m)) // blen, batches - 1)
        sums += np.bincount(idx, weights=y, minlength=batches)
        done += m
    if len(atoms) < 3 and not spec.deterministic:
        warnings.warn("gamma_furstenberg: projective chain visits fewer than 3 atoms; "
                      "the stationary measure may be trapped on a finite orbit", RuntimeWarning)
    lengths = np.full(batches, blen)
    lengths[-1] = n - blen * (batches - 1)
    return batch_estimate(sums, lengths, st.seed, spec.tag)


# ---------------------------------------------------------------------------
# strong irreducibility


@dataclass
class IrreducibilityVerdict:
    """Outcome of the bounded strong-irreducibility search."""

    tag: str  # "Irreducible", "FiniteInvariantSet" or "Inconclusive"
    witness: list = field(default_factory=list)

    def slopes(self) -> list:
        return [p.slope for p in self.witness]


def _real_eigendirections(M: Matrix2, tol: float):
    scale = max(M.max_abs(), 1e-300)
    if abs(M.b) <= tol * scale and abs(M.c) <= tol * scale and abs(M.a - M.d) <= tol * scale:
        return []  # scalar matrix, every direction is fixed
    w, V = np.linalg.eig(M.as_array())
    if np.any(np.abs(w.imag) > tol * scale):
        return []
    out = []
    for j in range(2):
        v = V[:, j].real
        out.append(ProjectivePoint(float(v[0]), float(v[1])))
    return out


def _contains(points, p, tol):
    return any(q.distance(p) < tol for q in points)


def _closure(p, gens, cap, tol):
    pts = [p]
    queue = [p]
    while queue:
        x = queue.pop()
        for g in gens:
            y, _ = x.apply(g)
            if not _contains(pts, y, tol):
                pts.append(y)
                queue.append(y)
                if len(pts) > cap:
                    return pts, False
    return pts, True


def strong_irreducibility(support, depth: int = 4, cap: int = 64, tol: float = 1e-9) -> IrreducibilityVerdict:
    """Bounded search for a finite invariant set of directions.

    Fixed directions of every product of at most `depth` generators are
    collected; each is closed under the generators until the orbit exceeds
    `cap` points.  Closed orbits are merged into the witness of a
    `FiniteInvariantSet` verdict.  This is a heuristic: a verdict of
    ``Irreducible`` means no finite invariant set was found within the
    search bounds.
    """
    gens = []
    for item in support:
        M, w = (item, 1.0) if isinstance(item, Matrix2) else item
        if w > 0:
            if M.det() == 0.0:
                raise ValidationError("support matrices must be invertible")
            gens.append(M)
    if not gens:
        raise ValidationError("empty support")
    candidates = []
    for length in range(1, depth + 1):
        for word in itertools.product(gens, repeat=length):
            M = word[0]
            for g in word[1:]:
                M = M @ g
                s = M.max_abs()
                M = M.scaled(1.0 / s)
            for p in _real_eigendirections(M, 1e-12):
                if not _contains(candidates, p, tol):
                    candidates.append(p)
    if not candidates:
        return IrreducibilityVerdict("Inconclusive")
    witness = []
    all_escape = True
    for p in candidates:
        if _contains(witness, p, tol):
            continue
        pts, closed = _closure(p, gens, cap, tol)
        if closed:
            for q in pts:
                if not _contains(witness, q, tol):
                    witness.append(q)
        elif len(pts) <= 2:
            all_escape = False
    if witness:
        for g in gens:
            for q in witness:
                if not _contains(witness, q.apply(g)[0], 10 * tol):
                    return IrreducibilityVerdict("Inconclusive")
        witness.sort(key=lambda q: q.angle)
        return IrreducibilityVerdict("FiniteInvariantSet", witness)
    return IrreducibilityVerdict("Irreducible" if all_escape else "Inconclusive")
