r"""Matrix ensembles, scalar laws and reproducible random streams.

Every model is described by a small frozen dataclass (an *ensemble spec*)
that knows how to draw its transfer matrices.  Impurity models act on the
state vector :math:`(\psi', \psi)`; one cell is an impurity kick followed by
free propagation over the spacing :math:`\ell`,

.. math::  A = F(\ell)\,\begin{pmatrix} 1 & v \\ 0 & 1 \end{pmatrix},

where for the string :math:`v = -\lambda m` and :math:`F` is the free
propagator at energy zero.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from typing import ClassVar

import numpy as np
from scipy import integrate, interpolate

from . import specfun
from .algebra import Matrix2
from .errors import ValidationError

# ---------------------------------------------------------------------------
# random streams


class RandomStream:
    """Counter-based random stream keyed by ``(seed, index)``.

    The underlying bit generator is Philox, whose j-th output is a pure
    function of the key and the counter j.  The key is derived from the
    master seed and the stream path with `numpy.random.SeedSequence`, so
    distinct indices give statistically independent streams.  The object is
    a cursor: drawing advances the counter.
    """

    def __init__(self, seed: int, index: int = 0, path: tuple = ()):
        if seed < 0 or index < 0:
            raise ValidationError("seed and stream index must be nonnegative")
        self.seed = int(seed)
        self.index = int(index)
        self.path = tuple(int(p) for p in path)
        key = np.random.SeedSequence(self.seed, spawn_key=(self.index,) + self.path).generate_state(2, np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def child(self, j: int) -> "RandomStream":
        """Independent sub-stream, used for replicas."""
        return RandomStream(self.seed, self.index, self.path + (j,))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, index={self.index}, path={self.path})"


def as_generator(rng) -> np.random.Generator:
    """Accept a RandomStream, a Generator or an integer seed."""
    if isinstance(rng, RandomStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RandomStream(int(rng)).generator
    raise ValidationError(f"cannot use {type(rng).__name__} as a random stream")


def stream_seed(rng) -> int:
    return rng.seed if isinstance(rng, RandomStream) else -1


# ---------------------------------------------------------------------------
# scalar distributions

_DIST_PARAMS = {
    "constant": ("value",),
    "exponential": ("mean",),
    "gamma": ("shape", "scale"),
    "uniform": ("low", "high"),
    "laplace": ("a",),
    "normal": ("mean", "std"),
    "choice": ("values", "probs"),
}


@dataclass(frozen=True)
class Dist:
    """A scalar law used for masses, spacings, couplings or fields.

    Supported kinds: ``constant(value)``, ``exponential(mean)``,
    ``gamma(shape, scale)``, ``uniform(low, high)``, ``laplace(a)`` with
    density ``(a/2) exp(-a|x|)``, ``normal(mean, std)`` and
    ``choice(values, probs)``.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in _DIST_PARAMS:
            raise ValidationError(f"unknown distribution kind {self.kind!r}")
        names = _DIST_PARAMS[self.kind]
        if len(self.params) != len(names):
            raise ValidationError(f"{self.kind} expects parameters {names}")
        p = dict(zip(names, self.params))
        if self.kind == "exponential" and not p["mean"] > 0:
            raise ValidationError("exponential mean must be positive")
        if self.kind == "gamma" and not (p["shape"] > 0 and p["scale"] > 0):
            raise ValidationError("gamma shape and scale must be positive")
        if self.kind == "uniform" and not p["high"] > p["low"]:
            raise ValidationError("uniform needs high > low")
        if self.kind == "laplace" and not p["a"] > 0:
            raise ValidationError("laplace rate a must be positive")
        if self.kind == "normal" and not p["std"] >= 0:
            raise ValidationError("normal std must be nonnegative")
        if self.kind == "choice":
            vals, probs = p["values"], p["probs"]
            if len(vals) != len(probs) or len(vals) == 0:
                raise ValidationError("choice needs matching nonempty values and probs")
            if any(q < 0 or q > 1 for q in probs) or abs(sum(probs) - 1.0) > 1e-12:
                raise ValidationError("choice probabilities must lie in [0, 1] and sum to 1")
            object.__setattr__(self, "params", (tuple(float(v) for v in vals), tuple(float(q) for q in probs)))

    # constructors
    @classmethod
    def constant(cls, value):
        return cls("constant", (float(value),))

    @classmethod
    def exponential(cls, mean):
        return cls("exponential", (float(mean),))

    @classmethod
    def gamma(cls, shape, scale):
        return cls("gamma", (float(shape), float(scale)))

    @classmethod
    def uniform(cls, low, high):
        return cls("uniform", (float(low), float(high)))

    @classmethod
    def laplace(cls, a):
        return cls("laplace", (float(a),))

    @classmethod
    def normal(cls, mean, std):
        return cls("normal", (float(mean), float(std)))

    @classmethod
    def choice(cls, values, probs):
        return cls("choice", (tuple(values), tuple(probs)))

    @property
    def p(self) -> dict:
        return dict(zip(_DIST_PARAMS[self.kind], self.params))

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        p = self.p
        k = self.kind
        if k == "constant":
            return np.full(size, p["value"])
        if k == "exponential":
            return gen.exponential(p["mean"], size)
        if k == "gamma":
            return gen.gamma(p["shape"], p["scale"], size)
        if k == "uniform":
            return gen.uniform(p["low"], p["high"], size)
        if k == "laplace":
            return gen.laplace(0.0, 1.0 / p["a"], size)
        if k == "normal":
            return gen.normal(p["mean"], p["std"], size)
        vals = np.asarray(p["values"])
        idx = gen.choice(len(vals), size=size, p=np.asarray(p["probs"]))
        return vals[idx]

    def mean(self) -> float:
        p = self.p
        k = self.kind
        if k == "constant":
            return p["value"]
        if k == "exponential":
            return p["mean"]
        if k == "gamma":
            return p["shape"] * p["scale"]
        if k == "uniform":
            return 0.5 * (p["low"] + p["high"])
        if k in ("laplace",):
            return 0.0
        if k == "normal":
            return p["mean"]
        return float(np.dot(p["values"], p["probs"]))

    def is_positive(self) -> bool:
        p = self.p
        k = self.kind
        if k == "constant":
            return p["value"] > 0
        if k in ("exponential", "gamma"):
            return True
        if k == "uniform":
            return p["low"] > 0
        if k == "choice":
            return min(p["values"]) > 0
        return False

    def char_fn(self, theta):
        """Characteristic function ``E exp(i theta X)``."""
        theta = np.asarray(theta, dtype=float)
        p = self.p
        k = self.kind
        if k == "constant":
            return np.exp(1j * theta * p["value"])
        if k == "laplace":
            a = p["a"]
            return a * a / (a * a + theta * theta) + 0j
        if k == "exponential":
            return 1.0 / (1.0 - 1j * theta * p["mean"])
        if k == "gamma":
            return (1.0 - 1j * theta * p["scale"]) ** (-p["shape"])
        if k == "normal":
            return np.exp(1j * theta * p["mean"] - 0.5 * (p["std"] * theta) ** 2)
        if k == "choice":
            v = np.asarray(p["values"])
            w = np.asarray(p["probs"])
            return np.sum(w * np.exp(1j * np.multiply.outer(theta, v)), axis=-1)
        raise ValidationError(f"no characteristic function available for {k!r} couplings")

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for name, val in zip(_DIST_PARAMS[self.kind], self.params):
            d[name] = list(val) if isinstance(val, tuple) else val
        return d

    @classmethod
    def from_dict(cls, d) -> "Dist":
        if isinstance(d, (int, float)):
            return cls.constant(d)
        if not isinstance(d, dict):
            raise ValidationError(f"a distribution must be a number or an object, got {d!r}")
        d = dict(d)
        kind = d.pop("kind", None)
        if kind not in _DIST_PARAMS:
            raise ValidationError(f"unknown distribution kind {kind!r}")
        names = _DIST_PARAMS[kind]
        extra = set(d) - set(names)
        if extra:
            raise ValidationError(f"unknown fields {sorted(extra)} for {kind} distribution")
        try:
            vals = tuple(tuple(d[n]) if isinstance(d[n], list) else float(d[n]) for n in names)
        except KeyError as exc:
            raise ValidationError(f"{kind} distribution missing field {exc}") from None
        except (TypeError, ValueError):
            raise ValidationError(f"{kind} distribution fields must be numbers") from None
        return cls(kind, vals)


def sample_gamma(p: float, q: float, rng, size=None):
    """Gamma(p, q) draws: density proportional to ``x^{p-1} e^{-x/q}``."""
    if not (p > 0 and q > 0):
        raise ValidationError("sample_gamma requires p, q > 0")
    return as_generator(rng).gamma(p, q, size)


# ---------------------------------------------------------------------------
# ensemble specs


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ValidationError(f"{name} must be a positive finite number, got {value!r}")


def _finite(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ValidationError(f"{name} must be a finite number, got {value!r}")


class EnsembleSpec:
    """Base class of the tagged model descriptions."""

    tag: ClassVar[str] = ""
    deterministic: ClassVar[bool] = False

    def to_dict(self) -> dict:
        params = {}
        for f in fields(self):
            v = getattr(self, f.name)
            params[f.name] = v.to_dict() if isinstance(v, Dist) else v
        return {"model": self.tag, "params": params}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_dict(d: dict) -> "EnsembleSpec":
        try:
            tag = d["model"]
        except (KeyError, TypeError):
            raise ValidationError("ensemble spec needs a 'model' tag") from None
        cls = MODELS.get(tag)
        if cls is None:
            raise ValidationError(f"unknown model {tag!r}; known: {sorted(MODELS)}")
        params = dict(d.get("params", {}))
        known = {f.name: f for f in fields(cls)}
        extra = set(params) - set(known)
        if extra:
            raise ValidationError(f"unknown parameters {sorted(extra)} for model {tag}")
        kwargs = {}
        for name, val in params.items():
            if name in cls._dist_fields:
                kwargs[name] = None if val is None else Dist.from_dict(val)
            else:
                kwargs[name] = val
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ValidationError(f"model {tag}: {exc}") from None

    @staticmethod
    def from_json(s: str) -> "EnsembleSpec":
        return EnsembleSpec.from_dict(json.loads(s))


@dataclass(frozen=True)
class DysonString(EnsembleSpec):
    """Random string: point masses `mass` separated by `spacing`, at spectral parameter `lam`."""

    mass: Dist = field(default_factory=lambda: Dist.exponential(1.0))
    spacing: Dist = field(default_factory=lambda: Dist.exponential(1.0))
    lam: float = 1.0
    tag: ClassVar[str] = "dyson-string"
    _dist_fields: ClassVar[tuple] = ("mass", "spacing")

    def __post_init__(self):
        _finite("lam", self.lam)
        if not (self.mass.is_positive() and self.spacing.is_positive()):
            raise ValidationError("string masses and spacings must be positive")


@dataclass(frozen=True)
class DysonTypeI(EnsembleSpec):
    """Type-I string built from i.i.d. ``c_j ~ Gamma(p, q)``."""

    p: float = 1.0
    q: float = 1.0
    lam: float = -1.0
    tag: ClassVar[str] = "dyson-type-i"
    _dist_fields: ClassVar[tuple] = ()

    def __post_init__(self):
        _positive("p", self.p)
        _positive("q", self.q)
        _finite("lam", self.lam)


@dataclass(frozen=True)
class FrischLloyd(EnsembleSpec):
    """Delta impurities of strength `coupling` at energy `E`.

    Spacings default to exponential with mean `ell` (Poisson impurities).
    """

    coupling: Dist = field(default_factory=lambda: Dist.exponential(1.0))
    ell: float = 1.0
    E: float = 1.0
    spacing: Dist | None = None
    tag: ClassVar[str] = "frisch-lloyd"
    _dist_fields: ClassVar[tuple] = ("coupling", "spacing")

    def __post_init__(self):
        _positive("ell", self.ell)
        _finite("E", self.E)
        if self.spacing is None:
            object.__setattr__(self, "spacing", Dist.exponential(self.ell))
        elif not self.spacing.is_positive():
            raise ValidationError("spacings must be positive")


@dataclass(frozen=True)
class KronigPenney(EnsembleSpec):
    """Periodic array of impurities of strength `v` with period `ell`."""

    v: float = 1.0
    ell: float = 1.0
    E: float = 1.0
    tag: ClassVar[str] = "kronig-penney"
    deterministic: ClassVar[bool] = True
    _dist_fields: ClassVar[tuple] = ()

    def __post_init__(self):
        _finite("v", self.v)
        _positive("ell", self.ell)
        _finite("E", self.E)


@dataclass(frozen=True)
class Anderson(EnsembleSpec):
    """Tight-binding chain with random site potential."""

    potential: Dist = field(default_factory=lambda: Dist.uniform(-0.5, 0.5))
    E: float = 0.0
    tag: ClassVar[str] = "anderson"
    _dist_fields: ClassVar[tuple] = ("potential",)

    def __post_init__(self):
        _finite("E", self.E)


@dataclass(frozen=True)
class IsingChain(EnsembleSpec):
    """Ising chain in a random field; matrices are spin transfer matrices."""

    beta: float = 1.0
    J: float = 1.0
    field: Dist = field(default_factory=lambda: Dist.choice((-1.0, 1.0), (0.5, 0.5)))
    tag: ClassVar[str] = "ising-chain"
    _dist_fields: ClassVar[tuple] = ("field",)

    def __post_init__(self):
        _positive("beta", self.beta)
        _finite("J", self.J)


@dataclass(frozen=True)
class Fibonacci(EnsembleSpec):
    """The constant matrix ``[[1, 1], [1, 0]]``."""

    tag: ClassVar[str] = "fibonacci"
    deterministic: ClassVar[bool] = True
    _dist_fields: ClassVar[tuple] = ()


@dataclass(frozen=True)
class RandomFibonacci(EnsembleSpec):
    """``[[+-1, 1], [1, 0]]`` with equal probabilities."""

    tag: ClassVar[str] = "random-fibonacci"
    _dist_fields: ClassVar[tuple] = ()


@dataclass(frozen=True)
class BougerolLacroix(EnsembleSpec):
    """``diag(alpha, 1/alpha)`` with probability `p`, else a quarter turn."""

    alpha: float = 2.0
    p: float = 0.5
    tag: ClassVar[str] = "bougerol-lacroix"
    _dist_fields: ClassVar[tuple] = ()

    def __post_init__(self):
        _positive("alpha", self.alpha)
        if not (0.0 <= self.p <= 1.0):
            raise ValidationError("p must lie in [0, 1]")


@dataclass(frozen=True)
class CohenNewman(EnsembleSpec):
    """``[[alpha, beta], [0, 1/alpha]]`` times a uniformly random rotation."""

    alpha: float = 2.0
    beta: float = 0.0
    tag: ClassVar[str] = "cohen-newman"
    _dist_fields: ClassVar[tuple] = ()

    def __post_init__(self):
        _finite("alpha", self.alpha)
        _finite("beta", self.beta)
        if self.alpha == 0:
            raise ValidationError("alpha must be nonzero")


MODELS = {
    cls.tag: cls
    for cls in (DysonString, DysonTypeI, FrischLloyd, KronigPenney, Anderson, IsingChain,
                Fibonacci, RandomFibonacci, BougerolLacroix, CohenNewman)
}

IMPURITY_MODELS = (DysonString, FrischLloyd, KronigPenney)


# ---------------------------------------------------------------------------
# matrices


def free_block(E, ell):
    """Entries ``(f11, f12, f21, f22)`` of the free propagator on ``(psi', psi)``.

    Works for real or complex `E` and array-valued `ell`:
    ``f11 = f22 = cos(k ell)``, ``f12 = -k sin(k ell)``,
    ``f21 = sin(k ell)/k`` with ``k^2 = E``.
    """
    ell = np.asarray(ell)
    if np.iscomplexobj(E) or np.iscomplexobj(ell):
        k = np.sqrt(complex(E))
        c = np.cos(k * ell)
        sk = ell * np.sinc(k * ell / np.pi)  # sin(k ell)/k
        return c, -E * sk, sk, c
    E = float(E)
    if E > 0:
        k = math.sqrt(E)
        c, s = np.cos(k * ell), np.sin(k * ell)
        return c, -k * s, s / k, c
    if E < 0:
        k = math.sqrt(-E)
        ch, sh = np.cosh(k * ell), np.sinh(k * ell)
        return ch, k * sh, sh / k, ch
    return np.ones_like(ell, dtype=float), np.zeros_like(ell, dtype=float), ell.astype(float), np.ones_like(ell, dtype=float)


def cell_matrices(E, ell, v):
    """Entries of ``F(ell) @ [[1, v], [0, 1]]`` for arrays of spacings and kicks."""
    f11, f12, f21, f22 = free_block(E, ell)
    return f11, f11 * v + f12, f21, f21 * v + f22


def impurity_form(spec):
    """Describe an impurity model as ``(E_free, spacing_law, kick_law_or_scale)``.

    Returns a tuple ``(E, spacing, kick, kick_scale)``: kicks are
    ``kick_scale * kick.sample()``.  Raises for non-impurity specs.
    """
    if isinstance(spec, FrischLloyd):
        return spec.E, spec.spacing, spec.coupling, 1.0
    if isinstance(spec, DysonString):
        return 0.0, spec.spacing, spec.mass, -spec.lam
    if isinstance(spec, KronigPenney):
        return spec.E, Dist.constant(spec.ell), Dist.constant(spec.v), 1.0
    raise ValidationError(f"{spec.tag} is not an impurity model with i.i.d. cells")


def type_i_weights(c: np.ndarray):
    """Spacings and masses of a Type-I string from its ``c_j`` sequence.

    ``ell_0 = 1/c_0``, ``m_1 = c_0/c_1``, ``ell_1 = c_1/(c_0 c_2)``, ... so
    that ``m_j ell_j = 1/c_{2j}`` and ``m_{j+1} ell_j = 1/c_{2j+1}``.
    Returns arrays ``ell`` (length n+1) and ``m`` (length n+1, ``m_0 = 0``)
    using ``c_0 .. c_{2n}``.
    """
    c = np.asarray(c, dtype=float)
    if c.size % 2 == 0:
        c = c[:-1]
    n = (c.size - 1) // 2
    logc = np.log(c)
    even = logc[0::2]  # c_0, c_2, ..., c_2n
    odd = logc[1::2]  # c_1, c_3, ..., c_{2n-1}
    se = np.cumsum(even)  # sum_{i<=j} log c_{2i}
    so = np.concatenate([[0.0], np.cumsum(odd)])  # sum_{i<j} log c_{2i+1}
    log_ell = so[: n + 1] - se[: n + 1]
    log_m = np.full(n + 1, -np.inf)
    log_m[1:] = se[:n] - so[1 : n + 1]
    return np.exp(log_ell), np.exp(log_m)


def sample_matrices(spec: EnsembleSpec, rng, size: int):
    """Draw `size` i.i.d. matrices; returns entry arrays ``(a, b, c, d)``.

    For `DysonTypeI` the cells of one realization (cells 1..size) are
    returned in order, since that model is not i.i.d.
    """
    gen = as_generator(rng)
    size = int(size)
    if isinstance(spec, Fibonacci):
        one, zero = np.ones(size), np.zeros(size)
        return one, one.copy(), one.copy(), zero
    if isinstance(spec, RandomFibonacci):
        sgn = np.where(gen.random(size) < 0.5, 1.0, -1.0)
        one, zero = np.ones(size), np.zeros(size)
        return sgn, one, one.copy(), zero
    if isinstance(spec, BougerolLacroix):
        isd = gen.random(size) < spec.p
        al = float(spec.alpha)
        a = np.where(isd, al, 0.0)
        b = np.where(isd, 0.0, -1.0)
        c = np.where(isd, 0.0, 1.0)
        d = np.where(isd, 1.0 / al, 0.0)
        return a, b, c, d
    if isinstance(spec, CohenNewman):
        th = gen.uniform(0.0, 2.0 * math.pi, size)
        cs, sn = np.cos(th), np.sin(th)
        al, be = float(spec.alpha), float(spec.beta)
        return al * cs + be * sn, -al * sn + be * cs, sn / al, cs / al
    if isinstance(spec, Anderson):
        V = spec.potential.sample(gen, size)
        one, zero = np.ones(size), np.zeros(size)
        return V - spec.E, -one, one.copy(), zero
    if isinstance(spec, IsingChain):
        h = spec.field.sample(gen, size)
        bJ, b = spec.beta * spec.J, spec.beta
        return np.exp(bJ + b * h), np.exp(-bJ + b * h), np.exp(-bJ - b * h), np.exp(bJ - b * h)
    if isinstance(spec, DysonTypeI):
        c = gen.gamma(spec.p, spec.q, 2 * size + 1)
        ell, m = type_i_weights(c)
        return cell_matrices(0.0, ell[1:], -spec.lam * m[1:])
    E, spacing, kick, scale = impurity_form(spec)
    ell = spacing.sample(gen, size)
    v = scale * kick.sample(gen, size)
    return cell_matrices(E, ell, v)


def sample_matrix(spec: EnsembleSpec, rng) -> Matrix2:
    """One draw of the transfer matrix of `spec`."""
    a, b, c, d = sample_matrices(spec, rng, 1)
    return Matrix2(float(a[0]), float(b[0]), float(c[0]), float(d[0]))


def finite_support(spec: EnsembleSpec):
    """``[(Matrix2, weight), ...]`` for finitely supported specs."""
    if isinstance(spec, Fibonacci):
        return [(Matrix2(1, 1, 1, 0), 1.0)]
    if isinstance(spec, RandomFibonacci):
        return [(Matrix2(1, 1, 1, 0), 0.5), (Matrix2(-1, 1, 1, 0), 0.5)]
    if isinstance(spec, BougerolLacroix):
        out = []
        if spec.p > 0:
            out.append((Matrix2.diag(spec.alpha, 1.0 / spec.alpha), spec.p))
        if spec.p < 1:
            out.append((Matrix2(0, -1, 1, 0), 1.0 - spec.p))
        return out
    if isinstance(spec, KronigPenney):
        a, b, c, d = cell_matrices(spec.E, np.array([spec.ell]), np.array([spec.v]))
        return [(Matrix2(float(a[0]), float(b[0]), float(c[0]), float(d[0])), 1.0)]
    raise ValidationError(f"{spec.tag} does not have a finite support")


def levy_exponent(spec, theta):
    """Levy exponent ``(E exp(i theta v) - 1)/ell`` of the impurity potential."""
    if not isinstance(spec, FrischLloyd):
        raise ValidationError("levy_exponent is defined for Frisch-Lloyd couplings")
    return (spec.coupling.char_fn(theta) - 1.0) / spec.ell


# ---------------------------------------------------------------------------
# Kummer and generalized inverse Gaussian laws


def density_kummer(p: float, q: float, r: float, y):
    """Kummer(p, q, r) density ``y^{p-1} (1+y)^{-p-q} e^{-r y} / (Gamma(p) U(p, 1-q, r))``."""
    if not (p > 0 and r > 0):
        raise ValidationError("Kummer law needs p > 0 and r > 0")
    y = np.asarray(y, dtype=float)
    log_norm = specfun.ln_gamma(p) + math.log(specfun.kummer_u(p, 1.0 - q, r))
    with np.errstate(divide="ignore", invalid="ignore"):
        logf = (p - 1.0) * np.log(y) - (p + q) * np.log1p(y) - r * y - log_norm
        out = np.where(y > 0, np.exp(logf), 0.0)
    return out if out.ndim else float(out)


def density_gig(p: float, a: float, b: float, x):
    """GIG(p, a, b) density ``(a/b)^{p/2} / (2 K_p(sqrt(ab))) x^{p-1} exp(-(a x + b/x)/2)``."""
    if not (a > 0 and b > 0):
        raise ValidationError("GIG law needs a > 0 and b > 0")
    x = np.asarray(x, dtype=float)
    s = math.sqrt(a * b)
    log_norm = 0.5 * p * math.log(a / b) - math.log(2.0 * specfun.bessel_kv(p, s))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logf = log_norm + (p - 1.0) * np.log(x) - 0.5 * (a * x + b / x)
        out = np.where(x > 0, np.exp(logf), 0.0)
    return out if out.ndim else float(out)


def cdf_from_density(pdf, x, *, max_nodes: int = 4096):
    """CDF of a density on (0, inf) at the points `x`, by piecewise quadrature.

    For more than `max_nodes` points the quadrature runs on that many
    sample quantiles and the rest is filled in by monotone cubic
    interpolation.
    """
    x = np.asarray(x, dtype=float)
    if x.size > max_nodes:
        nodes = np.unique(np.quantile(x, np.linspace(0.0, 1.0, max_nodes)))
        return np.clip(interpolate.PchipInterpolator(nodes, cdf_from_density(pdf, nodes))(x), 0.0, 1.0)
    order = np.argsort(x)
    xs = x[order]
    out = np.empty_like(xs)
    acc, prev = 0.0, 0.0
    for i, xi in enumerate(xs):
        if xi <= 0:
            out[i] = 0.0
            continue
        if xi > prev:
            acc += integrate.quad(pdf, prev, xi, epsabs=1e-13, epsrel=1e-10, limit=200)[0]
            prev = xi
        out[i] = acc
    res = np.empty_like(out)
    res[order] = out
    return np.clip(res, 0.0, 1.0)


def kummer_cdf(p, q, r, x):
    return cdf_from_density(lambda y: density_kummer(p, q, r, y), x)


def gig_cdf(p, a, b, x):
    return cdf_from_density(lambda y: density_gig(p, a, b, y), x)
