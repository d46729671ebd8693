r"""Exact 2x2 linear algebra, Moebius action and hyperbolic geometry.

A real 2x2 matrix

.. math::  A = \begin{pmatrix} a & b \\ c & d \end{pmatrix}

acts on the extended real line and on the upper half-plane by the linear
fractional map :math:`z \mapsto (az + b)/(cz + d)`.  Directions in the plane
are identified with slopes :math:`z = u_1/u_2 \in \mathbb{R}\cup\{\infty\}`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import MatrixOverflowError, ValidationError

OVERFLOW_GUARD = 1e300

Number = Union[float, complex]


@dataclass(frozen=True)
class Matrix2:
    """Real 2x2 matrix ``[[a, b], [c, d]]`` with value semantics."""

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def identity(cls) -> "Matrix2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, arr) -> "Matrix2":
        m = np.asarray(arr, dtype=float)
        if m.shape != (2, 2):
            raise ValidationError(f"expected a 2x2 array, got shape {m.shape}")
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @classmethod
    def diag(cls, p: float, q: float) -> "Matrix2":
        return cls(float(p), 0.0, 0.0, float(q))

    @classmethod
    def rotation(cls, theta: float) -> "Matrix2":
        c, s = math.cos(theta), math.sin(theta)
        return cls(c, -s, s, c)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def trace(self) -> float:
        return self.a + self.d

    def inverse(self) -> "Matrix2":
        D = self.det()
        if D == 0.0:
            raise ValidationError("singular matrix has no inverse")
        return Matrix2(self.d / D, -self.b / D, -self.c / D, self.a / D)

    def transpose(self) -> "Matrix2":
        return Matrix2(self.a, self.c, self.b, self.d)

    def scaled(self, s: float) -> "Matrix2":
        return Matrix2(s * self.a, s * self.b, s * self.c, s * self.d)

    def max_abs(self) -> float:
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))

    def __matmul__(self, other: "Matrix2") -> "Matrix2":
        return compose(self, other)

    def __call__(self, z):
        return mobius_apply(self, z)


def compose(A: Matrix2, B: Matrix2) -> Matrix2:
    """Matrix product ``A @ B``.

    Raises
    ------
    MatrixOverflowError
        If an entry of the product exceeds 1e300 in magnitude.
    """
    P = Matrix2(
        A.a * B.a + A.b * B.c,
        A.a * B.b + A.b * B.d,
        A.c * B.a + A.d * B.c,
        A.c * B.b + A.d * B.d,
    )
    m = P.max_abs()
    if not m <= OVERFLOW_GUARD:
        raise MatrixOverflowError(f"compose: entry magnitude {m:.3e} exceeds {OVERFLOW_GUARD:.0e}")
    return P


def frobenius_sq(A: Matrix2) -> float:
    """Squared Frobenius norm ``a^2 + b^2 + c^2 + d^2``."""
    return A.a * A.a + A.b * A.b + A.c * A.c + A.d * A.d


def mobius_apply(A: Matrix2, z):
    """Apply the linear fractional map of `A` to `z`.

    `z` may be a real number, ``math.inf`` (the point at infinity of the
    projective line) or a complex number.  Real inputs give real outputs,
    with ``math.inf`` returned when the denominator vanishes.
    """
    if isinstance(z, (complex, np.complexfloating)):
        num = A.a * z + A.b
        den = A.c * z + A.d
        if den == 0:
            return complex(math.inf, 0.0)
        return num / den
    z = float(z)
    if math.isinf(z):
        if A.c == 0.0:
            return math.inf
        return A.a / A.c
    den = A.c * z + A.d
    if den == 0.0:
        return math.inf
    return (A.a * z + A.b) / den


def mobius_apply_array(a, b, c, d, z):
    """Vectorized Moebius action for arrays of matrices and points.

    Real infinities are handled entrywise; complex arrays are mapped
    directly.
    """
    z = np.asarray(z)
    if np.iscomplexobj(z) or np.iscomplexobj(a):
        return (a * z + b) / (c * z + d)
    z = z.astype(float)
    at_inf = np.isinf(z)
    num = np.where(at_inf, a, a * np.where(at_inf, 0.0, z) + b)
    den = np.where(at_inf, c, c * np.where(at_inf, 0.0, z) + d)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    return np.where(den == 0, np.inf, out)


@dataclass(frozen=True)
class ProjectivePoint:
    """A direction in the plane, stored as a unit vector up to sign.

    The canonical representative has its first nonzero component positive.
    The point at infinity is ``u = (1, 0)``.
    """

    u0: float
    u1: float

    def __post_init__(self):
        r = math.hypot(self.u0, self.u1)
        if r == 0.0 or not math.isfinite(r):
            raise ValidationError("a direction needs a finite nonzero vector")
        u0, u1 = self.u0 / r, self.u1 / r
        if u0 < 0.0 or (u0 == 0.0 and u1 < 0.0):
            u0, u1 = -u0, -u1
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "u1", u1)

    @classmethod
    def from_slope(cls, z: float) -> "ProjectivePoint":
        if math.isinf(z):
            return cls(1.0, 0.0)
        return cls(float(z), 1.0)

    @property
    def slope(self) -> float:
        if self.u1 == 0.0:
            return math.inf
        return self.u0 / self.u1

    @property
    def angle(self) -> float:
        """Angle in [0, pi) of the line through the origin."""
        return math.atan2(self.u1, self.u0) % math.pi

    def apply(self, A: Matrix2) -> tuple["ProjectivePoint", float]:
        """Image under `A` and the log of the stretch factor ``|A u|``."""
        v0 = A.a * self.u0 + A.b * self.u1
        v1 = A.c * self.u0 + A.d * self.u1
        r = math.hypot(v0, v1)
        return ProjectivePoint(v0, v1), math.log(r)

    def distance(self, other: "ProjectivePoint") -> float:
        """Angular distance between lines, in [0, pi/2]."""
        d = abs(self.angle - other.angle)
        return min(d, math.pi - d)


@dataclass(frozen=True)
class HalfPlanePoint:
    """Point ``x + i y`` of the upper half-plane (``y > 0``)."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0.0:
            raise ValidationError(f"half-plane point needs y > 0, got {self.y}")

    @classmethod
    def from_complex(cls, z: complex) -> "HalfPlanePoint":
        return cls(float(z.real), float(z.imag))

    def as_complex(self) -> complex:
        return complex(self.x, self.y)

    def apply(self, A: Matrix2) -> "HalfPlanePoint":
        if A.det() <= 0.0:
            raise ValidationError("only matrices with positive determinant preserve the half-plane")
        return HalfPlanePoint.from_complex(mobius_apply(A, self.as_complex()))


def _as_xy(z):
    if isinstance(z, HalfPlanePoint):
        return z.x, z.y
    z = complex(z)
    return z.real, z.imag


def cosh_distance(z0, z1) -> float:
    """Hyperbolic cosine of the distance, clamped to be at least 1."""
    x0, y0 = _as_xy(z0)
    x1, y1 = _as_xy(z1)
    ch = ((x0 - x1) ** 2 + y0 * y0 + y1 * y1) / (2.0 * y0 * y1)
    return max(ch, 1.0)


def hyperbolic_distance(z0, z1) -> float:
    """Poincare distance between two points of the upper half-plane.

    Uses ``rho = 2 asinh(|z0 - z1| / (2 sqrt(y0 y1)))``, which equals
    ``arccosh`` of `cosh_distance` but keeps full relative accuracy for
    nearby points.
    """
    x0, y0 = _as_xy(z0)
    x1, y1 = _as_xy(z1)
    if not (y0 > 0 and y1 > 0):
        raise ValidationError("points must lie in the upper half-plane")
    return 2.0 * math.asinh(math.hypot(x0 - x1, y0 - y1) / (2.0 * math.sqrt(y0 * y1)))
