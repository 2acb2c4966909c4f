"""
Numerical substrate: branch-continued determinant powers, Gaussian
integrals, quadrature rules and asymptotic-series fitting.
"""

import logging
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import (
    ANotPositiveDefinite,
    BadNodeCount,
    IllConditioned,
    InsufficientSamples,
    NonSymmetric,
    PathDegeneracy,
    RealPartNotPositiveDefinite,
    ValidationError,
    ZeroValue,
)
from .models import AsymptoticFit, QuadratureRule

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
PD_TOL = 1e-10
DEGENERACY_TOL = 1e-14
MAX_CONDITION = 1e12
MAX_PATH_STEPS = 1 << 20

PERIODIC_TRAPEZOID = "periodic-trapezoid"
GAUSS_LEGENDRE = "gauss-legendre-composite"
RULE_KINDS = (PERIODIC_TRAPEZOID, GAUSS_LEGENDRE)


# =========================================================================
# Matrix checks
# =========================================================================


def check_symmetric(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Return m as a square array, raising NonSymmetric if m != m^T"""

    m = np.atleast_2d(np.asarray(m))
    if m.shape[0] != m.shape[1]:
        raise NonSymmetric(f"{name} is not square: shape {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    asym = np.max(np.abs(m - m.T)) if m.size else 0.0
    if asym > SYMMETRY_TOL * max(scale, 1e-300):
        raise NonSymmetric(f"{name} asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:g} * {scale:.3e}")
    return m


def is_positive_definite(a: np.ndarray) -> bool:
    """Smallest eigenvalue above PD_TOL times the trace"""

    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return True
    eig = np.linalg.eigvalsh(a)
    return bool(eig[0] > PD_TOL * max(np.trace(a), 0.0) and eig[0] > 0)


# =========================================================================
# Branch continuation and Gaussian integrals
# =========================================================================


def det_sqrt_continued(a: np.ndarray, b: np.ndarray) -> complex:
    """
    det^{-1/2}(A + iB) continued along t -> A + t·iB from det^{-1/2}(A) > 0.

    The path [0, 1] is subdivided until the argument of the determinant
    moves by less than pi/2 per step; the accumulated argument fixes the
    branch.

    Args:
        a: Real symmetric positive definite k x k matrix
        b: Real symmetric k x k matrix

    Returns:
        The continued value of det^{-1/2}(A + iB)

    Raises:
        NonSymmetric: if A or B is not symmetric
        ANotPositiveDefinite: if A is not positive definite
        PathDegeneracy: if det(A + t·iB) comes within tolerance of zero
    """

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        return 1 + 0j

    a = check_symmetric(a, "A")
    b = check_symmetric(b, "B")
    if a.shape != b.shape:
        raise NonSymmetric(f"A and B shapes differ: {a.shape} vs {b.shape}")
    if not is_positive_definite(a):
        raise ANotPositiveDefinite(f"smallest eigenvalue {np.linalg.eigvalsh(a)[0]:.3e}")

    steps = 16
    while True:
        t = np.linspace(0.0, 1.0, steps + 1)
        dets = np.linalg.det(a[None, :, :] + 1j * t[:, None, None] * b[None, :, :])
        floor = np.min(np.abs(dets))
        if floor < DEGENERACY_TOL * abs(dets[0]):
            raise PathDegeneracy(f"|det| fell to {floor:.3e} along the path")
        dphase = np.angle(dets[1:] / dets[:-1])
        if np.max(np.abs(dphase)) < np.pi / 2:
            break
        steps *= 2
        if steps > MAX_PATH_STEPS:
            raise PathDegeneracy(f"argument still jumps by >= pi/2 after {steps // 2} steps")

    phase = float(np.sum(dphase))
    logger.debug(f"branch path: {steps} steps, accumulated arg {phase:.6f}")
    return complex(abs(dets[-1]) ** -0.5 * np.exp(-0.5j * phase))


def gaussian_integral_closed(c: np.ndarray) -> complex:
    """
    Integral of exp(-pi <Z, C Z>) over R^k, i.e. det^{-1/2}(C) on the continued branch.

    Raises:
        NonSymmetric: if C is not symmetric
        RealPartNotPositiveDefinite: if Re C is not positive definite
    """

    c = check_symmetric(np.asarray(c, dtype=complex), "C")
    if c.size == 0:
        return 1 + 0j
    if not is_positive_definite(c.real):
        raise RealPartNotPositiveDefinite(
            f"smallest eigenvalue of Re C is {np.linalg.eigvalsh(c.real)[0]:.3e}"
        )
    return det_sqrt_continued(c.real, c.imag)


# =========================================================================
# Quadrature
# =========================================================================


@lru_cache(maxsize=64)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def build_rule(
    kind: str,
    interval: tuple[float, float],
    node_count: int,
    panel_size: int = 10,
) -> QuadratureRule:
    """
    Build a quadrature rule on a finite interval.

    periodic-trapezoid places node_count equispaced nodes starting at the
    left end with equal weights. gauss-legendre-composite splits the interval
    into equal panels of about panel_size Gauss-Legendre nodes each, spreading
    the remainder so the total is exactly node_count.

    Raises:
        BadNodeCount: if node_count < 2 or the interval is not finite
    """

    lo, hi = float(interval[0]), float(interval[1])
    if node_count < 2:
        raise BadNodeCount(f"node_count must be >= 2, got {node_count}")
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise BadNodeCount(f"interval must be finite and increasing, got [{lo}, {hi}]")

    if kind == PERIODIC_TRAPEZOID:
        h = (hi - lo) / node_count
        nodes = lo + h * np.arange(node_count)
        weights = np.full(node_count, h)
    elif kind == GAUSS_LEGENDRE:
        panels = max(1, node_count // panel_size)
        base, extra = divmod(node_count, panels)
        edges = np.linspace(lo, hi, panels + 1)
        node_parts, weight_parts = [], []
        for i in range(panels):
            x, w = _legendre(base + (1 if i < extra else 0))
            half = 0.5 * (edges[i + 1] - edges[i])
            node_parts.append(edges[i] + half * (x + 1.0))
            weight_parts.append(half * w)
        nodes = np.concatenate(node_parts)
        weights = np.concatenate(weight_parts)
    else:
        raise ValidationError(f"unknown rule kind '{kind}'. Available: {list(RULE_KINDS)}")

    return QuadratureRule(nodes=nodes, weights=weights, kind=kind, interval=(lo, hi))


# =========================================================================
# Asymptotic fitting
# =========================================================================


def _check_p_values(p_values: Sequence[int], minimum: int) -> np.ndarray:
    p = np.asarray(p_values, dtype=float)
    if len(p) < minimum:
        raise InsufficientSamples(f"need at least {minimum} p values, got {len(p)}")
    if np.any(np.diff(p) <= 0):
        raise InsufficientSamples(f"p values must be strictly increasing: {list(p_values)}")
    return p


def fit_power_series(
    p_values: Sequence[int],
    values: Sequence[complex],
    exponent: float,
    k: int = 2,
    max_condition: float = MAX_CONDITION,
) -> AsymptoticFit:
    """
    Least-squares fit of values ~ p^exponent · sum_{r<=k} b_r p^{-r}.

    Columns are scaled by p_min so the Vandermonde matrix stays well
    conditioned; the coefficients are rescaled on return.

    Args:
        p_values: Strictly increasing powers, at least k+2 of them
        values: Measured values (complex)
        exponent: Known leading exponent
        k: Order of the fitted series
        max_condition: Largest scaled Vandermonde condition number accepted

    Returns:
        AsymptoticFit with b_0..b_k and the RMS residual of the scaled data

    Raises:
        InsufficientSamples: too few or unordered p values
        IllConditioned: scaled Vandermonde condition number above max_condition
    """

    p = _check_p_values(p_values, k + 2)
    y = np.asarray(values, dtype=complex)
    if y.shape != p.shape:
        raise InsufficientSamples(f"{len(y)} values for {len(p)} p values")
    if not np.all(np.isfinite(y)):
        raise ValidationError("values must be finite")

    p_min = p[0]
    x = p_min / p
    vander = x[:, None] ** np.arange(k + 1)[None, :]
    cond = np.linalg.cond(vander)
    if cond > max_condition:
        raise IllConditioned(f"Vandermonde condition number {cond:.3e} for order {k}")

    scaled = y / p**exponent
    coeffs, *_ = np.linalg.lstsq(vander.astype(complex), scaled, rcond=None)
    residual = float(np.sqrt(np.mean(np.abs(vander @ coeffs - scaled) ** 2)))
    b = [complex(c * p_min**r) for r, c in enumerate(coeffs)]

    return AsymptoticFit(
        exponent=float(exponent),
        coefficients=b,
        residual_norm=residual,
        p_values=[int(v) for v in p_values],
    )


def estimate_exponent(p_values: Sequence[int], values: Sequence[complex]) -> float:
    """
    Least-squares slope of log|values| against log p.

    Raises:
        InsufficientSamples: fewer than 3 points
        ZeroValue: any value vanishes
    """

    p = _check_p_values(p_values, 3)
    mags = np.abs(np.asarray(values, dtype=complex))
    if np.any(mags == 0):
        raise ZeroValue("cannot take log of a zero value")
    slope, _ = np.polyfit(np.log(p), np.log(mags), 1)
    return float(slope)


def relative_error(measured: complex, predicted: complex) -> float:
    """|measured - predicted| / |predicted|, or the absolute error when predicted is 0"""

    denom = abs(predicted)
    return abs(measured - predicted) / denom if denom > 0 else abs(measured)
