"""
Intersections of two closed geodesics in the modular quotient.

Every lift g . axis2 over the coset table of <g2> is intersected with the
full axis of g1; hits are translated back into one period of axis1 by
powers of g1 and deduplicated, keeping the shallowest lift.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import SameAxis, TruncationSuspect, ValidationError
from ..localmodel import angle_coefficient
from .cosets import CosetTable
from .geodesics import Geodesic, section_coefficient
from .moebius import MoebiusElement, j_factor, moebius_apply

logger = logging.getLogger(__name__)

DEDUP_TOL = 1e-9
BOUNDARY_MARGIN = 2


def axis_intersection(a: Geodesic, b: Geodesic) -> Optional[complex]:
    """Common point of two geodesic axes in H, None when they do not cross"""

    if a.is_vertical and b.is_vertical:
        return None
    if b.is_vertical:
        a, b = b, a
    if a.is_vertical:
        x0 = a.start if math.isfinite(a.start) else a.end
        h = b.radius**2 - (x0 - b.center) ** 2
        return complex(x0, math.sqrt(h)) if h > 0 else None

    m1, r1, m2, r2 = a.center, a.radius, b.center, b.radius
    if m1 == m2:
        return None
    x = (r1 * r1 - r2 * r2 + m2 * m2 - m1 * m1) / (2.0 * (m2 - m1))
    h = r1 * r1 - (x - m1) ** 2
    return complex(x, math.sqrt(h)) if h > 0 else None


@dataclass
class GeodesicIntersection:
    """One transverse crossing of two closed geodesics in the quotient"""

    t1: float
    t2: float
    angle: float
    lam: complex
    point: complex
    element: tuple
    depth: int

    def b0(self) -> complex:
        return angle_coefficient(2 * math.pi - self.angle)

    def to_dict(self) -> dict:
        return {
            "t1": self.t1,
            "t2": self.t2,
            "angle": self.angle,
            "lambda": [self.lam.real, self.lam.imag],
            "point": [self.point.real, self.point.imag],
            "element": list(self.element),
            "depth": self.depth,
        }


def _circular_gap(a: float, b: float, period: float) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def _closed(geo: Geodesic, name: str) -> tuple[MoebiusElement, float]:
    if geo.generator is None or geo.translation_length is None:
        raise ValidationError(f"{name} is not a closed geodesic")
    return geo.generator, geo.translation_length


def quotient_geodesic_intersections(
    geo1: Geodesic,
    geo2: Geodesic,
    table: CosetTable,
    strict: bool = True,
) -> list[GeodesicIntersection]:
    """
    Crossings of geo1 and geo2 in SL2(Z) \\ H.

    Args:
        geo1: Closed geodesic; t1 is reported in [0, l1)
        geo2: Closed geodesic whose generator the table is built for
        table: Coset table of <g2>, no T-saturation needed
        strict: Raise when a crossing is only reached near the truncation depth

    Returns:
        Crossings sorted by t1, with the oriented angle from geo1 to geo2
        and lambda = <zeta1, g . zeta2> at the crossing

    Raises:
        SameAxis: some lift of axis2 is axis1
        TruncationSuspect: a crossing first appears within 2 word lengths of the boundary
    """

    g1, l1 = _closed(geo1, "geo1")
    g2, l2 = _closed(geo2, "geo2")
    if table.subgroup_generator != g2:
        raise ValidationError(f"table is for {table.subgroup_generator.as_tuple()}, not {g2.as_tuple()}")

    found: list[GeodesicIntersection] = []
    for g, depth in zip(table.representatives, table.depths):
        lift = geo2.image(g)
        if lift.same_axis(geo1):
            raise SameAxis(f"{g.as_tuple()} carries axis2 onto axis1")
        point = axis_intersection(geo1, lift)
        if point is None:
            continue

        k = math.floor(float(geo1.parameter_of(point)) / l1)
        shift = g1.power(-k)
        h = shift @ g
        point = complex(moebius_apply(shift, point))
        t1 = float(geo1.parameter_of(point)) % l1
        s = float(geo2.parameter_of(moebius_apply(h.inverse(), point)))
        t2 = s % l2

        if any(
            _circular_gap(t1, x.t1, l1) < DEDUP_TOL and _circular_gap(t2, x.t2, l2) < DEDUP_TOL for x in found
        ):
            continue

        w = complex(geo2.position(s))
        j = complex(j_factor(h, w))
        v1 = complex(geo1.velocity(t1))
        v2 = complex(geo2.velocity(s)) / j**2
        angle = float(np.angle(v2 / v1)) % (2 * math.pi)
        c1 = complex(section_coefficient(geo1, t1))
        c2 = complex(section_coefficient(geo2, s)) * j**2
        lam = c1 * np.conj(c2) * point.imag**2
        found.append(GeodesicIntersection(t1, t2, angle, complex(lam), point, h.as_tuple(), depth))

    deepest = max((x.depth for x in found), default=0)
    logger.debug(f"{len(found)} quotient crossings, deepest first hit at word length {deepest}")
    if strict and found and deepest > table.max_word_length - BOUNDARY_MARGIN:
        raise TruncationSuspect(
            f"crossing first found at word length {deepest} of {table.max_word_length}; extend the table"
        )
    return sorted(found, key=lambda x: x.t1)


def predict_geodesic_pairing(intersections: list[GeodesicIntersection], p: int, multiplicity: int = 1) -> complex:
    """Leading term m sum_q lambda_q^p b_{q,0} of <s1, s2>"""

    total = sum((x.lam**p * x.b0() for x in intersections), 0j)
    return complex(multiplicity * total)
