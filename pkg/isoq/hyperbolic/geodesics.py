"""
Geodesics and circles in the upper half-plane, with flat unit sections of K.

A section of K along z(t) is written c(t) dz; its pointwise norm is
|c| Im z and it is flat when c' = (i z' / Im z) c.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..curves import transport_log
from ..errors import (
    FlatnessViolation,
    NotBohrSommerfeldAtLevelP,
    NotInUpperHalfPlane,
    ValidationError,
)
from ..numerics import PERIODIC_TRAPEZOID, build_rule
from .moebius import MoebiusElement, j_factor, moebius_apply

logger = logging.getLogger(__name__)

EQUIVARIANCE_TOL = 1e-10
FLATNESS_TOL = 1e-8
HOLONOMY_TOL = 1e-8


# =========================================================================
# Geodesics
# =========================================================================


@dataclass(frozen=True)
class Geodesic:
    """
    Unit-speed geodesic running from `start` to `end` on R u {inf}.

    Semicircles use x = m + s R tanh t, y = R sech t; vertical lines use
    x0 + i e^{+-t}. When `generator` is set it translates the geodesic by
    `translation_length`: generator . z(t) = z(t + l).
    """

    start: float
    end: float
    translation_length: Optional[float] = None
    generator: Optional[MoebiusElement] = None

    def __post_init__(self):
        if self.start == self.end or (math.isinf(self.start) and math.isinf(self.end)):
            raise ValidationError(f"geodesic endpoints must differ, got {self.start}, {self.end}")

    @property
    def endpoints(self) -> tuple[float, float]:
        return (self.start, self.end)

    @property
    def is_vertical(self) -> bool:
        return math.isinf(self.start) or math.isinf(self.end)

    @property
    def center(self) -> float:
        return 0.5 * (self.start + self.end)

    @property
    def radius(self) -> float:
        return 0.5 * abs(self.end - self.start)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        if math.isinf(self.end):
            return self.start + 1j * np.exp(t)
        if math.isinf(self.start):
            return self.end + 1j * np.exp(-t)
        s = 1.0 if self.end > self.start else -1.0
        return self.center + s * self.radius * np.tanh(t) + 1j * self.radius / np.cosh(t)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        if math.isinf(self.end):
            return 1j * np.exp(t)
        if math.isinf(self.start):
            return -1j * np.exp(-t)
        s = 1.0 if self.end > self.start else -1.0
        sech = 1.0 / np.cosh(t)
        return s * self.radius * sech**2 - 1j * self.radius * sech * np.tanh(t)

    def _straighten(self, z):
        """Moebius map sending start -> 0 and end -> inf, up to reflection"""

        z = np.asarray(z, dtype=complex)
        if math.isinf(self.end):
            return z - self.start
        if math.isinf(self.start):
            return 1.0 / (z - self.end)
        return (z - self.start) / (z - self.end)

    def parameter_of(self, z):
        """Parameter of the point of the geodesic nearest to z"""
        return np.log(np.abs(self._straighten(z)))

    def distance_to(self, z):
        """Hyperbolic distance from z to the geodesic"""

        w = self._straighten(z)
        return np.arccosh(np.maximum(np.abs(w) / np.abs(w.imag), 1.0))

    def image(self, g: MoebiusElement) -> "Geodesic":
        """g . geodesic, with the generator conjugated along"""

        generator = self.generator.conjugate_by(g) if self.generator is not None else None
        return Geodesic(
            g.apply_boundary(self.start),
            g.apply_boundary(self.end),
            self.translation_length,
            generator,
        )

    def same_axis(self, other: "Geodesic", tol: float = 1e-12) -> bool:
        """Same unoriented axis"""

        def close(x, y):
            if math.isinf(x) or math.isinf(y):
                return math.isinf(x) and math.isinf(y)
            return abs(x - y) <= tol * max(1.0, abs(x))

        a, b = self.endpoints
        c, d = other.endpoints
        return (close(a, c) and close(b, d)) or (close(a, d) and close(b, c))


def equivariance_residual(geo: Geodesic, samples: int = 16) -> float:
    """Max hyperbolic-scaled gap |g0 z(t) - z(t + l)| / Im z(t + l) over one period"""

    if geo.generator is None or geo.translation_length is None:
        raise ValidationError("geodesic has no generator")
    t = np.linspace(0.0, geo.translation_length, samples)
    shifted = geo.position(t + geo.translation_length)
    moved = moebius_apply(geo.generator, geo.position(t))
    return float(np.max(np.abs(moved - shifted) / shifted.imag))


def geodesic_from_hyperbolic(g0: MoebiusElement) -> Geodesic:
    """
    Axis of a hyperbolic element, oriented from its repelling to its
    attracting fixed point, with translation length 2 arccosh(|tr|/2).

    Raises:
        NotHyperbolic: |trace| <= 2
    """

    repelling, attracting = g0.fixed_points()
    geo = Geodesic(repelling, attracting, g0.translation_length, g0)
    residual = equivariance_residual(geo)
    if residual > EQUIVARIANCE_TOL:
        raise ValidationError(
            f"{g0.as_tuple()} does not translate its axis by {geo.translation_length}: gap {residual:.3e}"
        )
    logger.debug(f"axis of {g0.as_tuple()}: {repelling} -> {attracting}, l={geo.translation_length:.6f}")
    return geo


# =========================================================================
# Flat sections
# =========================================================================


def connection_rate(position: Callable, velocity: Callable) -> Callable[[float], complex]:
    """t -> i z'(t) / Im z(t), the flat-section rate of K"""

    def rate(t: float) -> complex:
        z = complex(position(t))
        return 1j * complex(velocity(t)) / z.imag

    return rate


def flatness_deviation(
    position: Callable,
    velocity: Callable,
    coefficient: Callable,
    t_span: tuple[float, float],
    samples: int = 33,
) -> float:
    """Max relative gap between coefficient(t) and c(t_0) transported by the connection"""

    t_eval = np.linspace(t_span[0], t_span[1], samples)
    log_f = transport_log(connection_rate(position, velocity), t_span, t_eval)
    c = np.asarray(coefficient(t_eval), dtype=complex)
    transported = c[0] * np.exp(log_f)
    return float(np.max(np.abs(transported - c) / np.abs(c)))


def section_coefficient(geo: Geodesic, t):
    """c(t) = conj(z'(t)) / (Im z(t))^2"""
    return np.conj(geo.velocity(t)) / np.imag(geo.position(t)) ** 2


def geodesic_section(geo: Geodesic) -> Callable:
    """
    Unit flat conormal section along a geodesic, as t -> c(t).

    Checked against ODE transport over one period (or over [0, 1] for an
    open geodesic).

    Raises:
        FlatnessViolation: transport deviates by more than 1e-8 relative
    """

    span = (0.0, geo.translation_length or 1.0)
    deviation = flatness_deviation(
        geo.position, geo.velocity, lambda t: section_coefficient(geo, t), span
    )
    if deviation > FLATNESS_TOL:
        raise FlatnessViolation(f"geodesic section drifts by {deviation:.3e} under transport")
    return lambda t: section_coefficient(geo, t)


def section_equivariance_residual(geo: Geodesic, samples: int = 16) -> float:
    """Max relative gap |c(t + l) - c(t) j(g0, z(t))^2| / |c(t + l)|"""

    if geo.generator is None or geo.translation_length is None:
        raise ValidationError("geodesic has no generator")
    t = np.linspace(0.0, geo.translation_length, samples)
    shifted = section_coefficient(geo, t + geo.translation_length)
    pushed = section_coefficient(geo, t) * j_factor(geo.generator, geo.position(t)) ** 2
    return float(np.max(np.abs(shifted - pushed) / np.abs(shifted)))


# =========================================================================
# Circles about elliptic points
# =========================================================================


@dataclass(frozen=True)
class HyperbolicCircle:
    """Circle of hyperbolic radius `radius` about `center`, parametrized by the disk-model angle"""

    center: complex
    radius: float

    def __post_init__(self):
        if not complex(self.center).imag > 0:
            raise NotInUpperHalfPlane(f"circle center {self.center}")
        if not self.radius > 0:
            raise ValidationError(f"circle radius must be positive, got {self.radius}")

    @property
    def disk_radius(self) -> float:
        return math.tanh(self.radius / 2)

    @property
    def euclidean_center(self) -> complex:
        z0 = complex(self.center)
        return complex(z0.real, z0.imag * math.cosh(self.radius))

    @property
    def euclidean_radius(self) -> float:
        return complex(self.center).imag * math.sinh(self.radius)

    @property
    def area(self) -> float:
        return 2 * math.pi * (math.cosh(self.radius) - 1.0)

    @property
    def length(self) -> float:
        return 2 * math.pi * math.sinh(self.radius)

    def position(self, phi):
        z0 = complex(self.center)
        w = self.disk_radius * np.exp(1j * np.asarray(phi, dtype=float))
        return (z0 - z0.conjugate() * w) / (1.0 - w)

    def velocity(self, phi):
        z0 = complex(self.center)
        w = self.disk_radius * np.exp(1j * np.asarray(phi, dtype=float))
        return (z0 - z0.conjugate()) * 1j * w / (1.0 - w) ** 2

    def speed(self, phi):
        """Hyperbolic speed, constant sinh(radius)"""
        return np.abs(self.velocity(phi)) / np.imag(self.position(phi))


@dataclass
class CircleHolonomy:
    """K^p holonomy around a hyperbolic circle by transport and in closed form"""

    p: int
    area: float
    transported: complex
    closed_form: complex
    residual: float

    @property
    def admissible(self) -> bool:
        return self.residual < HOLONOMY_TOL

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "area": self.area,
            "transported": [self.transported.real, self.transported.imag],
            "closed_form": [self.closed_form.real, self.closed_form.imag],
            "residual": self.residual,
            "admissible": self.admissible,
        }


def hyperbolic_circle(center: complex, radius: float) -> HyperbolicCircle:
    return HyperbolicCircle(complex(center), float(radius))


def circle_holonomy(center: complex, radius: float, p: int) -> CircleHolonomy:
    """
    Holonomy exp(i p A) of K^p around the circle, A = 2 pi (cosh rho - 1).

    Raises:
        FlatnessViolation: ODE transport and the closed form disagree beyond 1e-8
    """

    circle = hyperbolic_circle(center, radius)
    log_f = transport_log(connection_rate(circle.position, circle.velocity), (0.0, 2 * math.pi))
    transported = complex(np.exp(p * log_f[-1]))
    closed = complex(np.exp(1j * p * circle.area))
    if abs(transported - closed) > HOLONOMY_TOL:
        raise FlatnessViolation(
            f"circle holonomy {transported:.10f} vs closed form {closed:.10f} at p={p}"
        )
    return CircleHolonomy(
        p=p,
        area=circle.area,
        transported=transported,
        closed_form=closed,
        residual=abs(closed - 1.0),
    )


def admissible_circle_radius(p: int, m: int = 1) -> float:
    """Radius with p (cosh rho - 1) = m"""

    if p < 1 or m < 1:
        raise ValidationError(f"need p >= 1 and m >= 1, got p={p}, m={m}")
    return math.acosh(1.0 + m / p)


@dataclass(frozen=True)
class EllipticCircle:
    """Bohr-Sommerfeld circle about an elliptic fixed point, sampled at quadrature nodes"""

    generator: MoebiusElement
    circle: HyperbolicCircle
    p: int
    phi: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    coefficient: np.ndarray
    amplitude: np.ndarray
    shift: float
    order: int
    holonomy_residual: float

    def __len__(self) -> int:
        return len(self.phi)

    @property
    def payload(self) -> np.ndarray:
        """Arclength weight times c^p (Im z)^{2p} f at each node"""
        return (
            self.weights
            * self.coefficient**self.p
            * np.imag(self.points) ** (2 * self.p)
            * self.amplitude
        )


def smallest_equivariant_level(shift: float, p: int, order: int) -> int:
    """
    Smallest m >= 1 with exp(i shift (p + m)) = 1.

    A flat section on the circle with p (cosh rho - 1) = m advances by
    exp(i shift cosh rho) under the rotation.
    """

    for m in range(1, 2 * order + 1):
        if abs(np.exp(1j * shift * (p + m)) - 1.0) < HOLONOMY_TOL:
            return m
    raise NotBohrSommerfeldAtLevelP(f"no equivariant circle at p={p} for rotation {shift:.6f}")


def equivariant_circle(
    g0: MoebiusElement,
    p: int,
    m: Optional[int] = None,
    oversampling: float = 1.0,
    phase_shift: float = 0.0,
    amplitude: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> EllipticCircle:
    """
    Admissible circle about the fixed point of an elliptic g0 with a flat
    section whose p-th power is g0-equivariant.

    The node count is a multiple of the order of g0, so g0 permutes the
    nodes. Without an explicit m the smallest equivariant level is used.

    Raises:
        NotElliptic: g0 is not elliptic
        NotBohrSommerfeldAtLevelP: the holonomy or the equivariance factor is not 1
        FlatnessViolation: transport disagrees with the closed-form holonomy
    """

    z0 = g0.elliptic_fixed_point()
    order = g0.elliptic_order()
    # g0 rotates the disk coordinate by j(g0, z0)^-2
    shift = (-2.0 * float(np.angle(j_factor(g0, z0)))) % (2 * math.pi)
    if m is None:
        m = smallest_equivariant_level(shift, p, order)
    rho = admissible_circle_radius(p, m)
    circle = hyperbolic_circle(z0, rho)
    report = circle_holonomy(z0, rho, p)
    if not report.admissible:
        raise NotBohrSommerfeldAtLevelP(f"rho={rho} at p={p}: residual {report.residual:.3e}")

    base = max(64, math.ceil(16 * math.sqrt(p) * circle.length))
    count = order * math.ceil(math.ceil(base * oversampling) / order)
    rule = build_rule(PERIODIC_TRAPEZOID, (0.0, 2 * math.pi), count)
    phi = rule.nodes
    points = circle.position(phi)
    velocity = circle.velocity(phi)

    log_f = transport_log(connection_rate(circle.position, circle.velocity), (0.0, 2 * math.pi), phi)
    start = np.conj(velocity[0]) / (abs(velocity[0]) * points[0].imag)
    coefficient = np.exp(1j * phase_shift) * start * np.exp(log_f)

    k = int(round(shift / (2 * math.pi / count))) % count
    gap = float(np.max(np.abs(moebius_apply(g0, points) - np.roll(points, -k)) / points.imag))
    if gap > EQUIVARIANCE_TOL:
        raise ValidationError(f"{g0.as_tuple()} does not rotate the circle onto its nodes: gap {gap:.3e}")

    level = coefficient**p
    pushed = (coefficient * j_factor(g0, points) ** 2) ** p
    ratio = np.roll(level, -k) / pushed
    if np.max(np.abs(ratio - ratio[0])) > FLATNESS_TOL:
        raise FlatnessViolation("pushed section is not a constant multiple of the shifted one")
    u = complex(np.mean(ratio))
    if abs(u - 1.0) > HOLONOMY_TOL:
        raise NotBohrSommerfeldAtLevelP(
            f"equivariance factor {u:.10f} != 1 at p={p}, m={m}; try another m"
        )

    values = np.ones(count, complex) if amplitude is None else np.asarray(amplitude(phi), complex)
    if np.max(np.abs(np.roll(values, -k) - values)) > EQUIVARIANCE_TOL * max(1.0, np.max(np.abs(values))):
        raise ValidationError("amplitude is not invariant under the rotation")

    logger.debug(f"elliptic circle about {z0:.6f}: rho={rho:.6f}, {count} nodes, order {order}")
    return EllipticCircle(
        generator=g0,
        circle=circle,
        p=p,
        phi=phi,
        points=points,
        weights=rule.weights * circle.speed(phi),
        coefficient=coefficient,
        amplitude=values,
        shift=shift,
        order=order,
        holonomy_residual=report.residual,
    )
