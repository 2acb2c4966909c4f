"""
Petersson norm of a cusp form over the truncated standard fundamental domain
|x| <= 1/2, |z| >= 1, y <= Y, and its comparison with the reproducing-property
route along the geodesic.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import GridTooCoarse, ValidationError
from ..numerics import GAUSS_LEGENDRE, build_rule
from .series import EPS, CuspFormEvaluator, GeodesicPairing, geodesic_norm

logger = logging.getLogger(__name__)

DEFAULT_GRID = 48
DOUBLING_TOL = 1e-4
MIN_HEIGHT = 10.0


@dataclass
class PeterssonNorm:
    """Integral of |s|^2 y^{2p-2} over the fundamental domain"""

    p: int
    value: float
    grid: int
    y_max: float
    certificate_delta: float
    multiplicity: int

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "value": self.value,
            "grid": self.grid,
            "y_max": self.y_max,
            "certificate_delta": self.certificate_delta,
            "multiplicity": self.multiplicity,
        }


def _domain_integral(ev: CuspFormEvaluator, y_max: float, grid: int, workers: int) -> float:
    x_rule = build_rule(GAUSS_LEGENDRE, (-0.5, 0.5), grid)
    u_rule = build_rule(GAUSS_LEGENDRE, (0.0, 1.0), grid)

    x = x_rule.nodes[:, None]
    floor = np.sqrt(1.0 - x**2)
    span = y_max - floor
    # quadratic grading clusters nodes near the arc where |s|^2 decays fastest
    u = u_rule.nodes[None, :]
    y = floor + span * u**2
    jacobian = 2.0 * span * u

    z = (x + 1j * y).ravel()
    s = ev.evaluate(z, workers).values.reshape(y.shape)
    density = np.abs(s) ** 2 * y ** (2 * ev.p - 2) * jacobian
    return float(x_rule.weights @ density @ u_rule.weights)


def petersson_norm(
    ev: CuspFormEvaluator,
    y_max: Optional[float] = None,
    grid: int = DEFAULT_GRID,
    tol: float = DOUBLING_TOL,
    workers: int = 1,
) -> PeterssonNorm:
    """
    Fundamental-domain route to ||s||^2.

    The grid is doubled once; the doubled value is reported and the relative
    change is its certificate. The domain integral counts every Moebius
    transformation once, so it is divided by the orbifold multiplicity to
    match the reproducing route.

    Raises:
        ValidationError: y_max below 10
        GridTooCoarse: doubling the grid moves the value by more than tol
    """

    y_max = max(MIN_HEIGHT, float(ev.p)) if y_max is None else float(y_max)
    if y_max < MIN_HEIGHT:
        raise ValidationError(f"y_max must be >= {MIN_HEIGHT}, got {y_max}")

    coarse = _domain_integral(ev, y_max, grid, workers)
    fine = _domain_integral(ev, y_max, 2 * grid, workers)
    delta = 0.0 if coarse == fine == 0.0 else abs(fine - coarse) / abs(fine)
    logger.debug(f"petersson p={ev.p}: grid {grid} -> {coarse:.12e}, {2 * grid} -> {fine:.12e}")
    if delta > tol:
        raise GridTooCoarse(f"doubling the {grid}-node grid changed the norm by {delta:.3e}")

    m = ev.table.multiplicity
    return PeterssonNorm(ev.p, fine / m, 2 * grid, y_max, delta, m)


@dataclass
class RouteComparison:
    """Reproducing route against the fundamental-domain route"""

    reproducing: GeodesicPairing
    domain: PeterssonNorm
    relative_gap: float
    tolerance: float

    @property
    def agree(self) -> bool:
        return self.relative_gap <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "reproducing": self.reproducing.to_dict(),
            "fundamental_domain": self.domain.to_dict(),
            "relative_gap": self.relative_gap,
            "tolerance": self.tolerance,
            "agree": self.agree,
        }


def compare_routes(
    ev: CuspFormEvaluator,
    y_max: Optional[float] = None,
    grid: int = DEFAULT_GRID,
    floor: float = 0.01,
    doubling_tol: float = DOUBLING_TOL,
    workers: int = 1,
) -> RouteComparison:
    """
    Both routes to the norm of a geodesic series.

    The tolerance is the combined error estimate, never below `floor`.
    `doubling_tol` bounds the grid-doubling change of the domain route.
    """

    reproducing = geodesic_norm(ev, workers=workers)
    domain = petersson_norm(ev, y_max, grid, doubling_tol, workers=workers)
    value = reproducing.value.real
    gap = abs(value - domain.value) / (abs(domain.value) + EPS)
    combined = (
        domain.certificate_delta
        + (reproducing.certificate_delta or 0.0)
        + reproducing.error / (abs(value) + EPS)
    )
    tolerance = max(floor, combined)
    if gap > tolerance:
        logger.warning(f"norm routes differ by {gap:.3e} at p={ev.p} (tolerance {tolerance:.3e})")
    return RouteComparison(reproducing, domain, gap, tolerance)

