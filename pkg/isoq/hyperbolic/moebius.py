"""
SL2(R) elements acting on the upper half-plane, and the weight-2p Bergman kernel.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..curves import KernelModel, register_model
from ..errors import NotElliptic, NotHyperbolic, NotInteger, NotInUpperHalfPlane, ValidationError

DET_TOL = 1e-12
TRACE_TOL = 1e-12


@dataclass(frozen=True)
class MoebiusElement:
    """
    Matrix [[a, b], [c, d]] with ad - bc = 1.

    Integer inputs stay integers, so products of integral elements are exact.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det - 1) >= DET_TOL * max(1.0, abs(self.a * self.d)):
            raise ValidationError(f"determinant {det} != 1 for {self.as_tuple()}")

    @classmethod
    def from_tuple(cls, entries) -> "MoebiusElement":
        a, b, c, d = entries
        return cls(a, b, c, d)

    @classmethod
    def integral(cls, entries) -> "MoebiusElement":
        """Element of SL2(Z); raises NotInteger for non-integral entries"""

        values = []
        for x in entries:
            if isinstance(x, (int, np.integer)):
                values.append(int(x))
            elif float(x).is_integer():
                values.append(int(x))
            else:
                raise NotInteger(f"entry {x} of {tuple(entries)} is not an integer")
        return cls(*values)

    def as_tuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @property
    def is_integral(self) -> bool:
        return all(isinstance(x, (int, np.integer)) for x in self.as_tuple())

    @property
    def trace(self):
        return self.a + self.d

    @property
    def kind(self) -> str:
        t = abs(self.trace)
        if t > 2 + TRACE_TOL:
            return "hyperbolic"
        if t < 2 - TRACE_TOL:
            return "elliptic"
        return "parabolic"

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        return MoebiusElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "MoebiusElement":
        return MoebiusElement(-self.a, -self.b, -self.c, -self.d)

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement(self.d, -self.b, -self.c, self.a)

    def power(self, k: int) -> "MoebiusElement":
        result = IDENTITY
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            result = result @ base
        return result

    def conjugate_by(self, g: "MoebiusElement") -> "MoebiusElement":
        """g self g^{-1}"""
        return g @ self @ g.inverse()

    def apply(self, z):
        return moebius_apply(self, z)

    def j(self, z):
        return j_factor(self, z)

    def apply_boundary(self, x: float) -> float:
        """Action on R u {inf}"""

        if math.isinf(x):
            return math.inf if self.c == 0 else self.a / self.c
        den = self.c * x + self.d
        if den == 0:
            return math.inf
        return (self.a * x + self.b) / den

    def quadratic_form(self, z):
        """c z^2 + (d - a) z - b, whose zeros are the fixed points"""
        return self.c * z * z + (self.d - self.a) * z - self.b

    def fixed_points(self) -> tuple:
        """
        Fixed points of a hyperbolic element, (repelling, attracting).

        Raises:
            NotHyperbolic: |trace| <= 2
        """

        if self.kind != "hyperbolic":
            raise NotHyperbolic(f"trace {self.trace} for {self.as_tuple()}")
        a, b, c, d = (float(x) for x in self.as_tuple())
        if c == 0:
            x0 = b / (d - a)
            # z -> a^2 z + ab: infinity attracts when |a| > 1
            return (x0, math.inf) if abs(a) > 1 else (math.inf, x0)
        disc = math.sqrt((a + d) ** 2 - 4)
        p1 = (a - d + disc) / (2 * c)
        p2 = (a - d - disc) / (2 * c)
        # derivative at a fixed point is (c x + d)^-2
        if abs(c * p1 + d) > 1:
            return (p2, p1)
        return (p1, p2)

    def elliptic_fixed_point(self) -> complex:
        """Fixed point in H of an elliptic element"""

        if self.kind != "elliptic":
            raise NotElliptic(f"trace {self.trace} for {self.as_tuple()}")
        a, b, c, d = (float(x) for x in self.as_tuple())
        disc = math.sqrt(4 - (a + d) ** 2)
        z = complex(a - d, disc) / (2 * c)
        return z if z.imag > 0 else z.conjugate()

    @property
    def eigenvalue(self) -> float:
        """Eigenvalue lambda > 1 in absolute value of a hyperbolic element"""

        t = abs(float(self.trace))
        if t <= 2:
            raise NotHyperbolic(f"trace {self.trace}")
        return (t + math.sqrt(t * t - 4)) / 2

    @property
    def translation_length(self) -> float:
        return 2 * math.acosh(abs(float(self.trace)) / 2)

    def elliptic_order(self, limit: int = 12) -> Optional[int]:
        """Smallest n with self^n = +-I, or None"""

        g = self
        for n in range(1, limit + 1):
            if np.allclose(g.matrix, np.eye(2)) or np.allclose(g.matrix, -np.eye(2)):
                return n
            g = g @ self
        return None


IDENTITY = MoebiusElement(1, 0, 0, 1)
MINUS_IDENTITY = MoebiusElement(-1, 0, 0, -1)
S = MoebiusElement(0, -1, 1, 0)
T = MoebiusElement(1, 1, 0, 1)
T_INV = MoebiusElement(1, -1, 0, 1)


def _check_upper(z) -> None:
    if np.any(np.imag(z) <= 0):
        raise NotInUpperHalfPlane(f"Im z must be positive, got {np.min(np.imag(z))}")


def moebius_apply(g: MoebiusElement, z):
    """
    (a z + b) / (c z + d).

    Raises:
        NotInUpperHalfPlane: Im z <= 0
    """

    _check_upper(z)
    return (g.a * z + g.b) / (g.c * z + g.d)


def j_factor(g: MoebiusElement, z):
    """
    Automorphy factor c z + d.

    Raises:
        NotInUpperHalfPlane: Im z <= 0
    """

    _check_upper(z)
    return g.c * z + g.d


def kernel_constant(p: int) -> float:
    """2^{2p-2} (2p-1) / pi"""
    return 2.0 ** (2 * p - 2) * (2 * p - 1) / math.pi


def hyperbolic_kernel(p: int, z, w):
    """
    Coefficient of dz^p dw-bar^p in the Bergman kernel of K^p on H:
    (-1)^p 2^{2p-2} (2p-1) / (pi (z - conj w)^{2p}).
    """

    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    value = (-1) ** p * kernel_constant(p) / (z - np.conj(w)) ** (2 * p)
    return complex(value) if np.ndim(value) == 0 else value


def weighted_kernel(p: int, z, w):
    """|P_p(z, w)| (Im z)^p (Im w)^p, invariant under SL2(R)"""

    return np.abs(hyperbolic_kernel(p, z, w)) * np.imag(z) ** p * np.imag(w) ** p


HYPERBOLIC = register_model(
    KernelModel(
        name="hyperbolic",
        kernel=hyperbolic_kernel,
        point_ndim=0,
        det_rl_over_2pi=1.0 / (2 * math.pi),
        connection="f' = (i gamma'/Im gamma) f for f dz",
        description="Upper half-plane, weight-2p Bergman kernel",
    )
)
