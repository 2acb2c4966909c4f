"""
Flat local model kernel on R^{2n} and the leading-coefficient predictors.

Coordinates are (u_1..u_n, v_1..v_n) with Omega(Z, Z') = sum u_j v'_j - v_j u'_j.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ANotPositiveDefinite,
    BranchPathInvalid,
    DimensionMismatch,
    NonSymmetric,
    NotIsotropic,
    NotLagrangian,
    OverlappingSubspaces,
    TangentialIntersection,
    ValidationError,
)
from .numerics import det_sqrt_continued, gaussian_integral_closed

FRAME_TOL = 1e-12
PRINCIPAL_ANGLE_TOL = 1e-8
TANGENTIAL_TOL = 1e-8
SQRT2 = math.sqrt(2.0)


def omega(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Standard symplectic pairing, broadcast over leading axes"""

    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    n = z.shape[-1] // 2
    return np.sum(z[..., :n] * w[..., n:] - z[..., n:] * w[..., :n], axis=-1)


def symplectic_matrix(n: int) -> np.ndarray:
    """J with Omega(z, w) = z^T J w"""

    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class LocalKernelParams:
    """Complex dimension and det(R^L / 2pi) at the base point"""

    n: int = 1
    det_rl_over_2pi: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise DimensionMismatch(f"complex dimension must be >= 1, got {self.n}")
        if not self.det_rl_over_2pi > 0:
            raise ValidationError(f"det(R^L/2pi) must be positive, got {self.det_rl_over_2pi}")
        j = symplectic_matrix(self.n)
        if not (np.allclose(j, -j.T) and abs(np.linalg.det(j)) > 0.5):
            raise ValidationError("symplectic pairing is degenerate")

    @property
    def dim_real(self) -> int:
        return 2 * self.n


@dataclass(frozen=True)
class IsotropicFrame:
    """Orthonormal, Omega-isotropic vectors spanning a subspace of R^{2n}"""

    dim_ambient: int
    vectors: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=float).reshape(-1, self.dim_ambient)
        object.__setattr__(self, "vectors", vecs)
        if self.dim_ambient % 2:
            raise DimensionMismatch(f"ambient dimension must be even, got {self.dim_ambient}")
        if len(vecs) == 0:
            return
        gram = vecs @ vecs.T
        if np.max(np.abs(gram - np.eye(len(vecs)))) > FRAME_TOL:
            raise NotIsotropic("frame is not orthonormal")
        pairing = vecs @ symplectic_matrix(self.dim_ambient // 2) @ vecs.T
        if np.max(np.abs(pairing)) > FRAME_TOL:
            raise NotIsotropic(f"Omega pairing {np.max(np.abs(pairing)):.3e} on frame vectors")

    @property
    def d(self) -> int:
        return len(self.vectors)

    @property
    def n(self) -> int:
        return self.dim_ambient // 2

    @property
    def is_lagrangian(self) -> bool:
        return self.d == self.n

    @classmethod
    def line(cls, theta: float) -> "IsotropicFrame":
        """The oriented line at angle theta in R^2"""
        return cls(2, np.array([[math.cos(theta), math.sin(theta)]]))

    @classmethod
    def empty(cls, dim_ambient: int = 2) -> "IsotropicFrame":
        return cls(dim_ambient, np.zeros((0, dim_ambient)))


def model_kernel(params: LocalKernelParams, z: np.ndarray, w: np.ndarray) -> np.ndarray | complex:
    """
    det(R^L/2pi) · exp(-(pi/2)|Z - Z'|^2 - i pi Omega(Z, Z')).

    Broadcasts over leading axes of z and w.

    Raises:
        DimensionMismatch: if the trailing dimension is not 2n
    """

    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if z.shape[-1] != params.dim_real or w.shape[-1] != params.dim_real:
        raise DimensionMismatch(
            f"points must have {params.dim_real} coordinates, got {z.shape[-1]} and {w.shape[-1]}"
        )
    sq = np.sum((z - w) ** 2, axis=-1)
    value = params.det_rl_over_2pi * np.exp(-0.5 * np.pi * sq - 1j * np.pi * omega(z, w))
    return complex(value) if np.ndim(value) == 0 else value


def smallest_principal_sine(sigma1: IsotropicFrame, sigma2: IsotropicFrame) -> float:
    """Sine of the smallest principal angle between the two spans"""

    if sigma1.d == 0 or sigma2.d == 0:
        return 1.0
    e = sigma1.vectors
    nu = sigma2.vectors
    residual = nu - (nu @ e.T) @ e
    return float(np.min(np.linalg.svd(residual, compute_uv=False)))


def gaussian_pair_integral(
    sigma1: IsotropicFrame,
    sigma2: IsotropicFrame,
    params: LocalKernelParams = LocalKernelParams(),
) -> complex:
    """
    Double integral of the model kernel over Sigma_2 x Sigma_1 in closed form.

    With a_ij = Omega(e_i, nu_j) and b_ij = <e_i, nu_j>, integrating the
    Lagrangian variable first leaves a Gaussian in the Sigma_2 variable with
    matrix (I - (B + iA)^T (B + iA)) / 2.

    Raises:
        NotLagrangian: sigma1 is not of dimension n
        OverlappingSubspaces: the spans meet in a nonzero vector
    """

    if sigma1.dim_ambient != params.dim_real or sigma2.dim_ambient != params.dim_real:
        raise DimensionMismatch("frames and kernel have different ambient dimensions")
    if not sigma1.is_lagrangian:
        raise NotLagrangian(f"first frame has dimension {sigma1.d}, expected {params.n}")
    sine = smallest_principal_sine(sigma1, sigma2)
    if sine <= PRINCIPAL_ANGLE_TOL:
        raise OverlappingSubspaces(f"smallest principal angle sine {sine:.3e}")

    e = sigma1.vectors
    nu = sigma2.vectors
    a = e @ symplectic_matrix(params.n) @ nu.T
    b = e @ nu.T
    mixed = b + 1j * a
    m = 0.5 * (np.eye(sigma2.d) - mixed.T @ mixed)
    return complex(
        params.det_rl_over_2pi * 2 ** (params.n / 2) * gaussian_integral_closed(m)
    )


def predict_norm_b0(
    d: int,
    f_sq_integral: float,
    det_factor: float = 1.0,
    density_ratio: float = 1.0,
) -> float:
    """2^{d/2} · integral of |f|^2 · det factor · density ratio"""

    return 2 ** (d / 2) * f_sq_integral * det_factor * density_ratio


def predict_intersection_b0(
    e_frame: IsotropicFrame,
    nu_frame: IsotropicFrame,
    fF_pairing: complex = 1.0,
    det_factor: float = 1.0,
    density_ratio: float = 1.0,
) -> complex:
    """
    Leading coefficient of an intersection pairing.

    Builds M_ij = i sum_k h(e_k, nu_i) omega(e_k, nu_j) with h = g - i omega
    and takes det^{-1/2} M along the continuation path from Re M. Empty normal
    frames give the empty determinant 1.

    Args:
        e_frame: Tangent frame of the first submanifold normal to the intersection
        nu_frame: Frame of the second submanifold normal to the intersection
        fF_pairing: Pairing of the amplitudes (and symbol) at the point
        det_factor: det(R^L / 2pi)
        density_ratio: Ratio of Riemannian to symplectic densities

    Raises:
        DimensionMismatch: frames live in different ambient spaces
        BranchPathInvalid: Re M not positive definite or M not symmetric
    """

    if e_frame.dim_ambient != nu_frame.dim_ambient:
        raise DimensionMismatch(
            f"frame ambient dimensions differ: {e_frame.dim_ambient} vs {nu_frame.dim_ambient}"
        )
    n = e_frame.n
    prefactor = 2 ** (n / 2) * complex(fF_pairing) * math.sqrt(det_factor) * density_ratio
    if nu_frame.d == 0 or e_frame.d == 0:
        return prefactor

    e = e_frame.vectors
    nu = nu_frame.vectors
    g = e @ nu.T
    w = e @ symplectic_matrix(n) @ nu.T
    m = 1j * (g - 1j * w).T @ w
    try:
        root = det_sqrt_continued(m.real, m.imag)
    except (NonSymmetric, ANotPositiveDefinite) as err:
        raise BranchPathInvalid(f"predictor matrix rejected: {err}") from err
    return prefactor * root


def angle_coefficient(theta: float) -> complex:
    """
    sqrt(2) e^{i(theta/2 - pi/4)} / sqrt(sin theta).

    For sin theta < 0 the root is taken as sqrt(-a) = i sqrt(a).

    Raises:
        TangentialIntersection: |sin theta| < 1e-8
    """

    theta = math.fmod(theta, 2 * math.pi)
    if theta < 0:
        theta += 2 * math.pi
    s = math.sin(theta)
    if abs(s) < TANGENTIAL_TOL:
        raise TangentialIntersection(f"sin(theta) = {s:.3e} at theta = {theta:.6f}")
    root = math.sqrt(s) if s > 0 else 1j * math.sqrt(-s)
    return SQRT2 * cmath.exp(1j * (theta / 2 - math.pi / 4)) / root
