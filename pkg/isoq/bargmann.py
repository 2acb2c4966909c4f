"""
Flat model geometry X = C = R^2 with the exact Bargmann kernel.

Conventions: Omega((u,v),(u',v')) = u v' - v u'; the kernel is
P_p(Z, Z') = p exp(-(pi p/2)|Z - Z'|^2 - i pi p Omega(Z, Z')); a unit flat
section of L^p along Z(t) solves zeta' = i pi p Omega(Z, Z') zeta.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .curves import (
    BohrSommerfeldCurve,
    KernelModel,
    ParametrizedCurve,
    StateEvaluator,
    check_compatible,
    register_model,
    transport_log,
)
from .errors import (
    DomainTooSmall,
    FlatnessViolation,
    NotBohrSommerfeldAtLevelP,
    TangentCircles,
    ValidationError,
)
from .localmodel import (
    IsotropicFrame,
    LocalKernelParams,
    model_kernel,
    omega,
    predict_intersection_b0,
)
from .numerics import GAUSS_LEGENDRE, PERIODIC_TRAPEZOID, build_rule

logger = logging.getLogger(__name__)

FLAT = LocalKernelParams(n=1, det_rl_over_2pi=1.0)

HOLONOMY_TOL = 1e-8
TRANSVERSE_TOL = 1e-6
DOMAIN_SIGMAS = 6.0
MIN_NODES = 64
NODES_PER_UNIT = 16.0
TAIL_TOL = 1e-10


def bargmann_kernel(p: int, z: np.ndarray, w: np.ndarray) -> np.ndarray | complex:
    """p · model_kernel(sqrt(p) Z, sqrt(p) Z') for the flat model"""

    root = math.sqrt(p)
    return p * model_kernel(FLAT, root * np.asarray(z, float), root * np.asarray(w, float))


BARGMANN = register_model(
    KernelModel(
        name="bargmann",
        kernel=bargmann_kernel,
        point_ndim=1,
        det_rl_over_2pi=1.0,
        connection="d - i pi p (u dv - v du)",
        description="Flat Bargmann plane, exact projector kernel",
    )
)


def to_point(z: complex) -> np.ndarray:
    """x + yi -> (u, v)"""
    return np.array([float(np.real(z)), float(np.imag(z))])


# =========================================================================
# Holonomy and admissibility
# =========================================================================


def signed_area(curve: ParametrizedCurve, samples: int = 1024) -> float:
    """Shoelace area (1/2) integral of u v' - v u' by the periodic trapezoid rule"""

    t = np.linspace(0.0, curve.period, samples, endpoint=False)
    return float(0.5 * np.sum(omega(curve.position(t), curve.velocity(t))) * curve.period / samples)


def level_one_phase_ode(curve: ParametrizedCurve, t_eval: Optional[np.ndarray] = None) -> np.ndarray:
    """Phase of the level-one flat section, phi' = pi Omega(Z, Z'), by ODE transport"""

    def rate(t: float) -> complex:
        z = curve.position(np.array([t]))[0]
        dz = curve.velocity(np.array([t]))[0]
        return complex(np.pi * (z[0] * dz[1] - z[1] * dz[0]))

    return transport_log(rate, (0.0, curve.period), t_eval).real


@dataclass
class HolonomyReport:
    """Holonomy of L^p around a closed curve, computed two ways"""

    p: int
    area: float
    shoelace: complex
    ode: complex
    residual: float
    order: Optional[int]

    @property
    def admissible(self) -> bool:
        return self.residual < HOLONOMY_TOL

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "area": self.area,
            "shoelace": [self.shoelace.real, self.shoelace.imag],
            "ode": [self.ode.real, self.ode.imag],
            "residual": self.residual,
            "order": self.order,
            "admissible": self.admissible,
        }


def holonomy_report(curve: ParametrizedCurve, p: int, max_order: int = 64) -> HolonomyReport:
    """
    Holonomy of L^p by shoelace area and by ODE transport.

    Raises:
        OpenCurve: the curve does not close
        FlatnessViolation: the two computations disagree beyond 1e-8
    """

    curve.check_closed()
    area = signed_area(curve)
    shoelace = complex(np.exp(-2j * np.pi * p * area))
    phi = float(level_one_phase_ode(curve)[-1])
    ode = complex(np.exp(-1j * p * phi))
    if abs(ode - shoelace) > HOLONOMY_TOL:
        raise FlatnessViolation(
            f"shoelace {shoelace:.10f} and transport {ode:.10f} disagree at p={p}"
        )
    return HolonomyReport(
        p=p,
        area=area,
        shoelace=shoelace,
        ode=ode,
        residual=abs(shoelace - 1.0),
        order=_finite_order(shoelace, max_order),
    )


def holonomy(curve: ParametrizedCurve, p: int) -> complex:
    """Closing factor exp(-2 pi i p Area) of L^p around the curve"""
    return holonomy_report(curve, p).shoelace


def _finite_order(value: complex, max_order: int) -> Optional[int]:
    for k in range(1, max_order + 1):
        if abs(value**k - 1.0) < HOLONOMY_TOL:
            return k
    return None


def bohr_sommerfeld_order(curve: ParametrizedCurve, p: int, max_order: int = 64) -> Optional[int]:
    """Smallest k <= max_order with trivial holonomy^k, or None"""
    return _finite_order(holonomy(curve, p), max_order)


def is_admissible(radius: float, p: int) -> bool:
    """p pi r^2 is an integer within tolerance"""
    q = p * math.pi * radius**2
    return abs(q - round(q)) < HOLONOMY_TOL


def snap_radius(radius: float, p: int) -> float:
    """Nearest radius with p pi r^2 a positive integer"""
    q = max(1, round(p * math.pi * radius**2))
    return math.sqrt(q / (p * math.pi))


def common_admissible_p(areas: list[float], p_values: list[int], tol: float = HOLONOMY_TOL) -> list[int]:
    """The p in p_values for which p·area is an integer for every area"""

    return [p for p in p_values if all(abs(p * a - round(p * a)) < tol for a in areas)]


def circle_phase(center: complex, radius: float, t: np.ndarray) -> np.ndarray:
    """Closed-form level-one phase pi (r^2 t + Omega(c, Z(t) - Z(0))) on a circle"""

    t = np.asarray(t, dtype=float)
    cu, cv = float(np.real(center)), float(np.imag(center))
    du = radius * (np.cos(t) - 1.0)
    dv = radius * np.sin(t)
    return np.pi * (radius**2 * t + cu * dv - cv * du)


# =========================================================================
# States
# =========================================================================


def node_count(
    p: int, length: float, oversampling: float = 1.0, minimum: int = MIN_NODES, per_unit: float = NODES_PER_UNIT
) -> int:
    """max(minimum, ceil(per_unit sqrt(p) length)) scaled by oversampling"""
    return int(math.ceil(max(minimum, math.ceil(per_unit * math.sqrt(p) * length)) * oversampling))


def make_bs_circle(
    radius: float,
    p: int,
    f: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    center: complex = 0j,
    oversampling: float = 1.0,
    phase_shift: float = 0.0,
    nodes: Optional[int] = None,
    min_nodes: int = MIN_NODES,
    nodes_per_unit: float = NODES_PER_UNIT,
) -> tuple[BohrSommerfeldCurve, StateEvaluator]:
    """
    Bohr-Sommerfeld circle and its isotropic state at level p.

    The section starts at zeta(0) = exp(i phase_shift) and is transported by
    the closed-form phase, which is checked against ODE transport at every
    node.

    Args:
        radius: Circle radius, with p pi r^2 an integer
        p: Tensor power
        f: Amplitude t -> complex on the angle parameter; defaults to 1
        center: Circle center as u + iv
        oversampling: Node count multiplier
        phase_shift: Constant phase of the level-one section
        nodes: Explicit node count (overrides the default rule)
        min_nodes: Floor of the default rule
        nodes_per_unit: Nodes per unit length per sqrt(p) in the default rule

    Returns:
        (BohrSommerfeldCurve, StateEvaluator)

    Raises:
        NotBohrSommerfeldAtLevelP: holonomy residual >= 1e-8
        FlatnessViolation: closed-form section disagrees with transport
    """

    if radius <= 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    curve = ParametrizedCurve.circle(center, radius)
    report = holonomy_report(curve, p)
    if not report.admissible:
        raise NotBohrSommerfeldAtLevelP(
            f"radius {radius} at p={p}: p*pi*r^2 = {p * math.pi * radius**2:.10f}, "
            f"holonomy residual {report.residual:.3e}"
        )

    length = 2 * math.pi * radius
    count = nodes or node_count(p, length, oversampling, min_nodes, nodes_per_unit)
    rule = build_rule(PERIODIC_TRAPEZOID, (0.0, 2 * math.pi), count)
    t = rule.nodes

    phi = circle_phase(center, radius, t)
    phi_ode = level_one_phase_ode(curve, t)
    drift = float(np.max(np.abs(np.exp(1j * p * (phi - phi_ode)) - 1.0)))
    if drift > HOLONOMY_TOL:
        raise FlatnessViolation(f"section drift {drift:.3e} against transport at p={p}")

    section = np.exp(1j * p * (phi + phase_shift))
    amplitude = np.ones_like(t, dtype=complex) if f is None else np.asarray(f(t), dtype=complex)

    bs = BohrSommerfeldCurve(
        curve=curve,
        p=p,
        t_nodes=t,
        section_values=section,
        holonomy_residual=report.residual,
        radius=radius,
        center=complex(center),
        phase_shift=phase_shift,
    )
    state = StateEvaluator(
        p=p,
        nodes=curve.position(t),
        weights=rule.weights * radius,
        payload=section * amplitude,
        model=BARGMANN,
        meta={"radius": radius, "center": complex(center), "nodes": count},
    )
    logger.debug(f"circle r={radius} c={center} p={p}: {count} nodes")
    return bs, state


def state_eval(state: StateEvaluator, x: np.ndarray, workers: int = 1) -> np.ndarray | complex:
    """s_{f,p}(x) as a node sum"""
    return state.evaluate(x, workers)


def inner_product(s1: StateEvaluator, s2: StateEvaluator, workers: int = 1) -> complex:
    """
    <s1, s2>_p, linear in s1.

    By the reproducing property this is the curve-2 integral of s1 against
    the conjugate curve-2 payload.
    """

    check_compatible(s1, s2)
    values = s1.evaluate(s2.nodes, workers)
    return complex(np.sum(values * np.conj(s2.amplitudes)))


def norm_sq(state: StateEvaluator, workers: int = 1) -> float:
    return inner_product(state, state, workers).real


# =========================================================================
# Toeplitz matrix elements
# =========================================================================

SYMBOLS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "one": lambda x: np.ones(x.shape[:-1]),
    "u2": lambda x: x[..., 0] ** 2,
    "v2": lambda x: x[..., 1] ** 2,
    "r2": lambda x: x[..., 0] ** 2 + x[..., 1] ** 2,
}


def get_symbol(name: str) -> Callable[[np.ndarray], np.ndarray]:
    if name not in SYMBOLS:
        raise ValidationError(f"Unknown symbol: {name}. Available: {list(SYMBOLS.keys())}")
    return SYMBOLS[name]


def toeplitz_inner(
    F: Callable[[np.ndarray], np.ndarray],
    s1: StateEvaluator,
    s2: StateEvaluator,
    oversampling: float = 1.0,
    sigmas: float = DOMAIN_SIGMAS,
    workers: int = 1,
) -> complex:
    """
    <T_{F,p} s1, s2> as the plane integral of F s1 conj(s2).

    The plane integral runs over a polar grid about the centroid of both
    curves: an annulus covering every node inflated by sigmas/sqrt(p), with
    composite Gauss-Legendre in the radius and the periodic trapezoid in the
    angle.

    Raises:
        DomainTooSmall: the integrand at the annulus edges exceeds 1e-10 of its peak
    """

    check_compatible(s1, s2)
    p = s1.p
    nodes = np.concatenate([s1.nodes, s2.nodes])
    center = nodes.mean(axis=0)
    rho = np.linalg.norm(nodes - center, axis=1)
    margin = sigmas / math.sqrt(p)
    r_lo = max(0.0, float(rho.min()) - margin)
    r_hi = float(rho.max()) + margin

    n_r = int(math.ceil(max(40, math.ceil(8 * math.sqrt(p) * (r_hi - r_lo))) * oversampling))
    n_t = int(math.ceil(max(64, math.ceil(16 * math.sqrt(p) * 2 * math.pi * r_hi)) * oversampling))
    radial = build_rule(GAUSS_LEGENDRE, (r_lo, r_hi), n_r)
    angular = build_rule(PERIODIC_TRAPEZOID, (0.0, 2 * math.pi), n_t)

    rr, tt = np.meshgrid(radial.nodes, angular.nodes, indexing="ij")
    pts = center + np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1)
    v1 = s1.evaluate(pts, workers)
    v2 = v1 if s2 is s1 else s2.evaluate(pts, workers)
    density = v1 * np.conj(v2)

    edge = [np.max(np.abs(density[-1]))]
    if r_lo > 0:
        edge.append(np.max(np.abs(density[0])))
    peak = float(np.max(np.abs(density)))
    if peak > 0 and max(edge) > TAIL_TOL * peak:
        raise DomainTooSmall(
            f"integrand at annulus edge is {max(edge) / peak:.3e} of peak (margin {margin:.3f})"
        )

    integrand = F(pts) * density * rr
    logger.debug(f"toeplitz grid {n_r} x {n_t} on [{r_lo:.3f}, {r_hi:.3f}]")
    return complex(radial.weights @ integrand @ angular.weights)


def predict_curve_b0(
    state: StateEvaluator,
    F: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> float:
    """sqrt(2) · curve integral of F |f|^2, from the state's own nodes"""

    values = np.abs(state.payload) ** 2
    if F is not None:
        values = values * F(state.nodes)
    return float(math.sqrt(2.0) * np.real(np.sum(state.weights * values)))


# =========================================================================
# Oracles and profiles
# =========================================================================


def reproducing_residual(
    p: int,
    x: np.ndarray,
    z: np.ndarray,
    sigmas: float = 10.0,
    oversampling: float = 1.0,
) -> float:
    """
    |integral P_p(x, y) P_p(y, z) dy - P_p(x, z)| / p by a 2D Gauss-Legendre box.

    The box is centered between x and z with half width |x - z|/2 + sigmas/sqrt(p).
    """

    x = np.asarray(x, float)
    z = np.asarray(z, float)
    mid = 0.5 * (x + z)
    half = 0.5 * float(np.linalg.norm(x - z)) + sigmas / math.sqrt(p)
    width = 2 * half
    n = int(math.ceil(max(80, math.ceil(24 * math.sqrt(p) * width)) * oversampling))
    ru = build_rule(GAUSS_LEGENDRE, (mid[0] - half, mid[0] + half), n)
    rv = build_rule(GAUSS_LEGENDRE, (mid[1] - half, mid[1] + half), n)
    uu, vv = np.meshgrid(ru.nodes, rv.nodes, indexing="ij")
    y = np.stack([uu, vv], axis=-1)
    integrand = bargmann_kernel(p, x, y) * bargmann_kernel(p, y, z)
    value = ru.weights @ integrand @ rv.weights
    return float(abs(value - bargmann_kernel(p, x, z)) / p)


@dataclass
class ConcentrationProfile:
    """|s| along a normal ray and its fitted Gaussian decay rate"""

    deltas: np.ndarray
    magnitudes: np.ndarray
    decay_rate: float
    expected_rate: float
    bound_rate: float

    @property
    def relative_rate_error(self) -> float:
        return abs(self.decay_rate - self.expected_rate) / self.expected_rate

    @property
    def meets_kernel_bound(self) -> bool:
        return self.decay_rate >= self.bound_rate


def concentration_profile(
    state: StateEvaluator,
    point: np.ndarray,
    normal: np.ndarray,
    deltas: np.ndarray,
) -> ConcentrationProfile:
    """
    Sample |s(point + delta · normal)| and fit log|s| = a - rate · delta^2.

    The kernel modulus alone bounds the rate below by pi p / 2. For a
    Lagrangian curve the phase of the kernel doubles it: the expected rate
    is pi p. Use symmetric deltas so the odd curvature terms drop out.
    """

    normal = np.asarray(normal, float)
    normal = normal / np.linalg.norm(normal)
    deltas = np.asarray(deltas, float)
    pts = np.asarray(point, float)[None, :] + deltas[:, None] * normal[None, :]
    mags = np.abs(state.evaluate(pts))
    if np.any(mags == 0):
        raise ValidationError("state vanishes on the profile; shorten the deltas")
    slope, _ = np.polyfit(deltas**2, np.log(mags), 1)
    return ConcentrationProfile(
        deltas=deltas,
        magnitudes=mags,
        decay_rate=float(-slope),
        expected_rate=math.pi * state.p,
        bound_rate=math.pi * state.p / 2,
    )


# =========================================================================
# Circle intersections
# =========================================================================


@dataclass(frozen=True)
class CircleSpec:
    center: complex
    radius: float


@dataclass(frozen=True)
class CircleIntersection:
    """Transverse intersection: point, oriented tangent angle 1 -> 2, parameters"""

    point: np.ndarray
    theta: float
    t1: float
    t2: float


def intersect_circles(c1: CircleSpec, c2: CircleSpec) -> list[CircleIntersection]:
    """
    Intersection points of two counter-clockwise circles.

    Raises:
        TangentCircles: the circles touch
        ValidationError: the circles coincide
    """

    z1, z2 = complex(c1.center), complex(c2.center)
    r1, r2 = c1.radius, c2.radius
    d = abs(z2 - z1)
    if d < TRANSVERSE_TOL and abs(r1 - r2) < TRANSVERSE_TOL:
        raise ValidationError("circles coincide; use the overlap scenario")
    if abs(d - abs(r1 - r2)) <= TRANSVERSE_TOL or abs(d - (r1 + r2)) <= TRANSVERSE_TOL:
        raise TangentCircles(f"d={d}, r1={r1}, r2={r2}")
    if d > r1 + r2 or d < abs(r1 - r2):
        return []

    e = (z2 - z1) / d
    a = (d**2 + r1**2 - r2**2) / (2 * d)
    h = math.sqrt(max(r1**2 - a**2, 0.0))
    found = []
    for sign in (1.0, -1.0):
        q = z1 + (a + sign * 1j * h) * e
        t1 = float(np.angle(q - z1)) % (2 * math.pi)
        t2 = float(np.angle(q - z2)) % (2 * math.pi)
        tangent1 = 1j * (q - z1)
        tangent2 = 1j * (q - z2)
        theta = float(np.angle(tangent2 / tangent1)) % (2 * math.pi)
        found.append(CircleIntersection(point=to_point(q), theta=theta, t1=t1, t2=t2))
    return found


@dataclass
class IntersectionTerm:
    """One leading term lambda^p b of an intersection pairing"""

    point: np.ndarray
    theta: float
    lam: complex
    b0: complex

    def value(self, p: int) -> complex:
        return self.lam**p * self.b0


def circle_intersection_terms(
    c1: BohrSommerfeldCurve,
    c2: BohrSommerfeldCurve,
    f1: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    f2: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> list[IntersectionTerm]:
    """
    Leading terms of <s1, s2> at the transverse intersections of two circles.

    lambda is zeta_1 conj(zeta_2) for the level-one sections at the point and
    b is the intersection predictor with e along curve 2 and nu along curve 1.
    """

    spec1 = CircleSpec(c1.center, c1.radius)
    spec2 = CircleSpec(c2.center, c2.radius)
    terms = []
    for hit in intersect_circles(spec1, spec2):
        zeta1 = np.exp(1j * (circle_phase(c1.center, c1.radius, hit.t1) + c1.phase_shift))
        zeta2 = np.exp(1j * (circle_phase(c2.center, c2.radius, hit.t2) + c2.phase_shift))
        amp1 = 1.0 if f1 is None else complex(f1(np.array([hit.t1]))[0])
        amp2 = 1.0 if f2 is None else complex(f2(np.array([hit.t2]))[0])
        arg1 = hit.t1 + math.pi / 2
        arg2 = hit.t2 + math.pi / 2
        b0 = predict_intersection_b0(
            IsotropicFrame.line(arg2), IsotropicFrame.line(arg1), amp1 * np.conj(amp2)
        )
        terms.append(IntersectionTerm(hit.point, hit.theta, complex(zeta1 * np.conj(zeta2)), b0))
    return terms
