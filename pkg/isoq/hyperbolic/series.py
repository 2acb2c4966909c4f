"""
Relative Poincare series: the isotropic states of closed geodesics and of
elliptic circles pushed to the modular quotient.

A geodesic state is summed in Katok's closed form kappa sum_g Q_h(z)^-p with
h = g g0 g^-1 and Q_h(z) = c z^2 + (d - a) z - b; the unfolded quadrature
over each lifted geodesic is available as a cross-check and measures kappa.
Elliptic states are summed by quadrature over the circle.

Truncation is tracked per word-length shell: the last shell's absolute
contribution, extrapolated geometrically, plus the tail of the T-orbits cut
at |k| = K.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.special import betaln

from ..errors import (
    NotInUpperHalfPlane,
    TruncationNotConverged,
    ValidationError,
    WeightTooSmall,
    WordLengthTooSmall,
)
from ..numerics import GAUSS_LEGENDRE, PERIODIC_TRAPEZOID, build_rule
from ..parallel import fixed_chunks, ordered_map, tree_sum
from .cosets import PSL2, CosetTable, coset_reps, saturation_width
from .geodesics import EllipticCircle, Geodesic, geodesic_from_hyperbolic
from .moebius import IDENTITY, MoebiusElement, hyperbolic_kernel, j_factor, kernel_constant, moebius_apply

logger = logging.getLogger(__name__)

SHELL_TOL = 1e-8
SHELL_RATIO_WARN = 0.8
ENVELOPE_CUTOFF = 1e-14
REFERENCE_POINT = 2j
POINT_CHUNK = 64
ENTRY_CHUNK = 512
EPS = 1e-300


def _check_weight(p: int) -> None:
    if p < 2:
        raise WeightTooSmall(f"weight 2p = {2 * p} < 4: the series does not converge")


def _check_points(z: np.ndarray) -> None:
    if np.any(z.imag <= 0):
        raise NotInUpperHalfPlane(f"Im z must be positive, got {np.min(z.imag)}")


def katok_constant(p: int, g0: MoebiusElement) -> float:
    """
    Closed-form ratio between the unfolded integral and Q_{g0}(z)^-p:
    c_p B(p, p) (1/lambda - lambda)^p sign(tr g0)^p.
    """

    lam = g0.eigenvalue
    sign = 1 if g0.trace > 0 else -1
    log_mag = math.log(kernel_constant(p)) + float(betaln(p, p)) + p * math.log(lam - 1.0 / lam)
    return (-sign) ** p * math.exp(log_mag)


# =========================================================================
# Per-coset terms
# =========================================================================


@dataclass(frozen=True)
class KatokTerms:
    """Q_h(z)^-p for every h = g g0 g^-1 in a table"""

    p: int
    coefficients: np.ndarray

    @classmethod
    def from_table(cls, table: CosetTable, p: int) -> "KatokTerms":
        rows = [(h.c, h.d - h.a, -h.b) for h in table.conjugates()]
        return cls(p, np.asarray(rows, dtype=float).reshape(-1, 3))

    def __call__(self, entries: slice, z: np.ndarray) -> np.ndarray:
        c, b, a = self.coefficients[entries].T
        q = c[:, None] * z[None, :] ** 2 + b[:, None] * z[None, :] + a[:, None]
        return q ** (-self.p)


@dataclass(frozen=True)
class CircleTerms:
    """Circle quadrature of k_p(z, g w) (c j(g, w)^2)^p (Im g w)^{2p} f for every g in a table"""

    p: int
    circle: EllipticCircle
    elements: tuple

    @classmethod
    def from_table(cls, table: CosetTable, circle: EllipticCircle) -> "CircleTerms":
        return cls(circle.p, circle, tuple(table.representatives))

    def __call__(self, entries: slice, z: np.ndarray) -> np.ndarray:
        points = self.circle.points
        payload = self.circle.payload
        block = self.elements[entries]
        out = np.empty((len(block), len(z)), dtype=complex)
        for i, g in enumerate(block):
            w = moebius_apply(g, points)
            factor = payload * np.conj(j_factor(g, points)) ** (-2 * self.p)
            out[i] = hyperbolic_kernel(self.p, z[:, None], w[None, :]) @ factor
        return out


# =========================================================================
# Evaluator
# =========================================================================


@dataclass
class SeriesEvaluation:
    """Series values at points with per-shell absolute contributions and error estimates"""

    z: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    shells: np.ndarray
    saturation_tail: np.ndarray

    @property
    def shell_ratios(self) -> np.ndarray:
        if len(self.shells) < 2:
            return np.full(len(self.z), np.nan)
        prev = self.shells[-2]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(prev > 0, self.shells[-1] / prev, 0.0)

    @property
    def relative_last_shell(self) -> np.ndarray:
        return self.shells[-1] / (np.abs(self.values) + EPS)


@dataclass
class CuspFormEvaluator:
    """
    Truncated relative Poincare series of weight 2p.

    scale carries kappa (geodesics) and the orbifold multiplicity.
    """

    p: int
    table: CosetTable
    terms: Union[KatokTerms, CircleTerms]
    scale: complex
    kind: str
    geodesic: Optional[Geodesic] = None
    circle: Optional[EllipticCircle] = None
    shell_tol: float = SHELL_TOL
    shell_ratio_warn: float = SHELL_RATIO_WARN
    meta: dict = field(default_factory=dict)

    @property
    def weight(self) -> int:
        return 2 * self.p

    def evaluate(self, z, workers: int = 1) -> SeriesEvaluation:
        """
        Evaluate at one or many points.

        Point chunks are fixed, shells are summed in depth order, so values
        do not depend on the worker count.
        """

        z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        _check_points(z)
        shells = self.table.shells()
        edge = np.asarray(self.table.edge, dtype=bool)

        def chunk(sl: slice):
            pts = z[sl]
            sums, mags = [], []
            tail = np.zeros(len(pts))
            for shell in shells:
                if shell.stop == shell.start:
                    sums.append(np.zeros(len(pts), complex))
                    mags.append(np.zeros(len(pts)))
                    continue
                partial, magnitude = [], []
                for es in _offset_chunks(shell):
                    terms = self.terms(es, pts)
                    absolute = np.abs(terms)
                    partial.append(tree_sum(terms))
                    magnitude.append(absolute.sum(axis=0))
                    tail += absolute[edge[es]].sum(axis=0)
                sums.append(tree_sum(partial))
                mags.append(np.sum(magnitude, axis=0))
            return np.array(sums), np.array(mags), tail

        parts = ordered_map(chunk, fixed_chunks(len(z), POINT_CHUNK), workers)
        sums = np.concatenate([s for s, _, _ in parts], axis=1)
        mags = np.concatenate([m for _, m, _ in parts], axis=1) * abs(self.scale)
        tail = np.concatenate([t for _, _, t in parts]) * abs(self.scale)

        values = tree_sum(list(sums)) * self.scale
        k = self.table.saturation
        saturation_tail = tail * k / (2 * self.p - 1) if k else np.zeros(len(z))
        evaluation = SeriesEvaluation(z, values, np.zeros(len(z)), mags, saturation_tail)

        ratios = evaluation.shell_ratios
        last = mags[-1]
        if len(mags) < 2:
            geometric = last.copy()
        else:
            geometric = np.where(ratios < 1, last / (1 - np.minimum(ratios, 0.999999)), last * len(mags))
        evaluation.errors = geometric + saturation_tail

        worst = float(np.nanmax(ratios)) if len(mags) >= 2 else float("nan")
        if worst >= self.shell_ratio_warn:
            logger.warning(f"shell ratio {worst:.3f} at weight {self.weight}: truncation is not geometric")
        return evaluation

    def __call__(self, z, workers: int = 1):
        values = self.evaluate(z, workers).values
        return complex(values[0]) if np.ndim(z) == 0 else values

    def check_truncation(self, evaluation: SeriesEvaluation) -> float:
        """
        Largest last-shell share of the partial sum.

        Raises:
            TruncationNotConverged: the share exceeds shell_tol
        """

        share = float(np.max(evaluation.relative_last_shell))
        if share > self.shell_tol:
            raise TruncationNotConverged(
                f"last shell carries {share:.3e} of the sum at word length {self.table.max_word_length}"
            )
        return share


def _offset_chunks(shell: slice) -> list[slice]:
    return [
        slice(shell.start + s.start, shell.start + s.stop)
        for s in fixed_chunks(shell.stop - shell.start, ENTRY_CHUNK)
    ]


def geodesic_series(
    g0: MoebiusElement,
    p: int,
    table: Optional[CosetTable] = None,
    word_length: int = 8,
    convention: str = PSL2,
    saturation: Optional[int] = None,
    shell_tol: float = SHELL_TOL,
    shell_ratio_warn: float = SHELL_RATIO_WARN,
) -> CuspFormEvaluator:
    """
    Relative Poincare series of the closed geodesic of a hyperbolic g0.

    Raises:
        WeightTooSmall: p < 2
        NotHyperbolic: g0 is not hyperbolic
    """

    _check_weight(p)
    geo = geodesic_from_hyperbolic(g0)
    if table is None:
        width = saturation_width(p) if saturation is None else saturation
        table = coset_reps(g0, word_length, convention, width)
    elif table.subgroup_generator != g0:
        raise ValidationError(f"table is for {table.subgroup_generator.as_tuple()}, not {g0.as_tuple()}")

    kappa = katok_constant(p, g0)
    return CuspFormEvaluator(
        p=p,
        table=table,
        terms=KatokTerms.from_table(table, p),
        scale=kappa * table.multiplicity,
        kind="geodesic",
        geodesic=geo,
        shell_tol=shell_tol,
        shell_ratio_warn=shell_ratio_warn,
        meta={"kappa": kappa, "multiplicity": table.multiplicity},
    )


def elliptic_series_evaluator(
    circle: EllipticCircle,
    table: Optional[CosetTable] = None,
    word_length: int = 8,
    convention: str = PSL2,
    saturation: Optional[int] = None,
    shell_tol: float = SHELL_TOL,
    shell_ratio_warn: float = SHELL_RATIO_WARN,
) -> CuspFormEvaluator:
    """Relative Poincare series of a Bohr-Sommerfeld circle about an elliptic point"""

    p = circle.p
    _check_weight(p)
    g0 = circle.generator
    if table is None:
        width = saturation_width(p) if saturation is None else saturation
        table = coset_reps(g0, word_length, convention, width)
    elif table.subgroup_generator != g0:
        raise ValidationError(f"table is for {table.subgroup_generator.as_tuple()}, not {g0.as_tuple()}")

    return CuspFormEvaluator(
        p=p,
        table=table,
        terms=CircleTerms.from_table(table, circle),
        scale=float(table.multiplicity),
        kind="elliptic",
        circle=circle,
        shell_tol=shell_tol,
        shell_ratio_warn=shell_ratio_warn,
        meta={"multiplicity": table.multiplicity, "radius": circle.circle.radius},
    )


# =========================================================================
# Unfolded quadrature
# =========================================================================


def window_half_width(p: int, distance: float, cutoff: float = ENVELOPE_CUTOFF) -> float:
    """
    Half-width of the parameter window outside which the kernel envelope
    along a geodesic is below cutoff times its peak.

    The weighted kernel is c_p (4 cosh^2(d/2))^-p and cosh d = cosh d* cosh(t - t*).
    """

    ch = math.cosh(distance)
    target = (cutoff ** (-1.0 / p) * (1.0 + ch) - 1.0) / ch
    return math.acosh(max(1.0, target))


def coset_quadrature(
    p: int,
    z: complex,
    g: MoebiusElement,
    geo: Geodesic,
    oversampling: float = 1.0,
    cutoff: float = ENVELOPE_CUTOFF,
) -> tuple[complex, int]:
    """
    Integral over t in R of k_p(z, g gamma(t)) conj((g gamma)'(t))^p.

    Returns (value, nodes used).
    """

    u = complex(moebius_apply(g.inverse(), complex(z)))
    center = float(geo.parameter_of(u))
    half = window_half_width(p, float(geo.distance_to(u)), cutoff)
    count = int(math.ceil(max(64, 16 * p * half) * oversampling))
    rule = build_rule(GAUSS_LEGENDRE, (center - half, center + half), count)

    gamma = geo.position(rule.nodes)
    j = j_factor(g, gamma)
    w = (g.a * gamma + g.b) / j
    dw = geo.velocity(rule.nodes) / j**2
    values = hyperbolic_kernel(p, complex(z), w) * np.conj(dw) ** p
    return complex(rule.integrate(values)), count


def unfolded_series(
    ev: CuspFormEvaluator,
    z: complex,
    oversampling: float = 1.0,
    workers: int = 1,
) -> complex:
    """Sum of coset_quadrature over the table, times the orbifold multiplicity"""

    if ev.geodesic is None:
        raise ValidationError("unfolded quadrature needs a geodesic series")
    reps = ev.table.representatives

    def chunk(sl: slice) -> complex:
        return tree_sum([coset_quadrature(ev.p, z, g, ev.geodesic, oversampling)[0] for g in reps[sl]])

    partials = ordered_map(chunk, fixed_chunks(len(reps), ENTRY_CHUNK), workers)
    return complex(tree_sum(partials)) * ev.table.multiplicity


@dataclass
class KatokMeasurement:
    """kappa measured as identity-coset quadrature over Q_{g0}(z)^-p"""

    p: int
    z: complex
    measured: complex
    analytic: float
    certificate_delta: float
    nodes_used: int

    @property
    def relative_error(self) -> float:
        return abs(self.measured - self.analytic) / abs(self.analytic)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "z": [self.z.real, self.z.imag],
            "measured": [self.measured.real, self.measured.imag],
            "analytic": self.analytic,
            "relative_error": self.relative_error,
            "certificate_delta": self.certificate_delta,
            "nodes_used": self.nodes_used,
        }


def measure_katok_constant(p: int, g0: MoebiusElement, z: complex = REFERENCE_POINT) -> KatokMeasurement:
    """Identity-coset quadrature divided by Q_{g0}(z)^-p, with a node-doubling certificate"""

    _check_weight(p)
    geo = geodesic_from_hyperbolic(g0)
    closed = complex(g0.quadratic_form(complex(z))) ** (-p)
    value, nodes = coset_quadrature(p, z, IDENTITY, geo)
    refined, _ = coset_quadrature(p, z, IDENTITY, geo, oversampling=2.0)
    return KatokMeasurement(
        p=p,
        z=complex(z),
        measured=refined / closed,
        analytic=katok_constant(p, g0),
        certificate_delta=abs(refined - value) / abs(refined),
        nodes_used=nodes,
    )


@dataclass
class PoincareValue:
    """Series value at one point in Katok form and by unfolded quadrature"""

    z: complex
    katok: complex
    error: float
    quadrature: Optional[complex]
    proportionality: Optional[complex]
    kappa_analytic: float
    shell_ratio: float
    relative_last_shell: float

    def to_dict(self) -> dict:
        def pair(v):
            return None if v is None else [v.real, v.imag]

        return {
            "z": pair(self.z),
            "katok": pair(self.katok),
            "error": self.error,
            "quadrature": pair(self.quadrature),
            "proportionality": pair(self.proportionality),
            "kappa_analytic": self.kappa_analytic,
            "shell_ratio": self.shell_ratio,
            "relative_last_shell": self.relative_last_shell,
        }


def relative_poincare_series(
    p: int,
    g0: MoebiusElement,
    z: complex,
    table: CosetTable,
    quadrature: bool = True,
    workers: int = 1,
) -> PoincareValue:
    """
    Relative Poincare series of the geodesic of g0 at z, in both forms.

    The proportionality constant is the unfolded sum divided by the bare
    Katok sum m sum_g Q_h(z)^-p; it equals kappa for every z.

    Raises:
        WeightTooSmall: p < 2
        WordLengthTooSmall: fewer than two word-length shells
        TruncationNotConverged: the last shell exceeds 1e-8 of the sum
    """

    _check_weight(p)
    if table.max_word_length < 2:
        raise WordLengthTooSmall(f"need word length >= 2 for a truncation estimate, got {table.max_word_length}")
    ev = geodesic_series(g0, p, table)
    evaluation = ev.evaluate([z], workers)
    ev.check_truncation(evaluation)
    katok = complex(evaluation.values[0])

    unfolded = proportionality = None
    if quadrature:
        unfolded = unfolded_series(ev, z, workers=workers)
        proportionality = unfolded * ev.meta["kappa"] / katok

    return PoincareValue(
        z=complex(z),
        katok=katok,
        error=float(evaluation.errors[0]),
        quadrature=unfolded,
        proportionality=proportionality,
        kappa_analytic=ev.meta["kappa"],
        shell_ratio=float(evaluation.shell_ratios[0]),
        relative_last_shell=float(evaluation.relative_last_shell[0]),
    )


def elliptic_series(
    p: int,
    g0: MoebiusElement,
    circle: EllipticCircle,
    z: complex,
    table: CosetTable,
    workers: int = 1,
) -> complex:
    """
    Coset sum of the circle quadrature at z.

    Raises:
        WeightTooSmall: p < 2
        ValidationError: circle and table belong to other data
    """

    _check_weight(p)
    if circle.p != p or circle.generator != g0:
        raise ValidationError(f"circle is for p={circle.p}, {circle.generator.as_tuple()}")
    ev = elliptic_series_evaluator(circle, table)
    return complex(ev.evaluate([z], workers).values[0])


# =========================================================================
# Modularity
# =========================================================================


@dataclass
class ModularityCheck:
    """|s(gz) - j(g,z)^{2p} s(z)| / (|s(z)| + eps) and its truncation bound"""

    element: tuple
    z: complex
    residual: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.bound

    def to_dict(self) -> dict:
        return {
            "element": list(self.element),
            "z": [self.z.real, self.z.imag],
            "residual": self.residual,
            "bound": self.bound,
            "passed": self.passed,
        }


def modularity_check(ev: CuspFormEvaluator, g: MoebiusElement, z: complex, workers: int = 1) -> ModularityCheck:
    z = complex(z)
    gz = complex(moebius_apply(g, z))
    factor = complex(j_factor(g, z)) ** (2 * ev.p)
    evaluation = ev.evaluate(np.array([z, gz]), workers)
    s, sg = evaluation.values
    err, err_g = evaluation.errors
    denom = abs(s) + EPS
    return ModularityCheck(
        element=g.as_tuple(),
        z=z,
        residual=float(abs(sg - factor * s) / denom),
        bound=float((err_g + abs(factor) * err) / denom),
    )


def modularity_residual(ev: CuspFormEvaluator, g: MoebiusElement, z: complex) -> float:
    """|s(gz) - j(g,z)^{2p} s(z)| / (|s(z)| + eps)"""
    return modularity_check(ev, g, z).residual


def sample_points(count: int, seed: int = 0) -> np.ndarray:
    """Seeded test points with |x| <= 1/2 and 0.9 <= y <= 1.8"""

    rng = np.random.default_rng(seed)
    return rng.uniform(-0.5, 0.5, count) + 1j * rng.uniform(0.9, 1.8, count)


@dataclass
class NonVanishing:
    """Sample point where |s| stands furthest above its truncation error"""

    p: int
    point: complex
    magnitude: float
    error: float
    factor: float = 10.0

    @property
    def witnessed(self) -> bool:
        return self.magnitude > self.factor * self.error

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "weight": 2 * self.p,
            "point": [self.point.real, self.point.imag],
            "magnitude": self.magnitude,
            "error": self.error,
            "factor": self.factor,
            "witnessed": self.witnessed,
        }


def nonvanishing_witness(ev: CuspFormEvaluator, points, factor: float = 10.0, workers: int = 1) -> NonVanishing:
    evaluation = ev.evaluate(points, workers)
    magnitudes = np.abs(evaluation.values)
    best = int(np.argmax(magnitudes / (evaluation.errors + EPS)))
    return NonVanishing(
        p=ev.p,
        point=complex(evaluation.z[best]),
        magnitude=float(magnitudes[best]),
        error=float(evaluation.errors[best]),
        factor=factor,
    )


# =========================================================================
# Pairings along geodesics
# =========================================================================


@dataclass
class GeodesicPairing:
    """Integral over one period of s(gamma(t)) gamma'(t)^p"""

    p: int
    value: complex
    error: float
    relative_last_shell: float
    nodes_used: int
    certificate_delta: Optional[float] = None
    shell_ratio: float = math.nan

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "value": [self.value.real, self.value.imag],
            "error": self.error,
            "relative_last_shell": self.relative_last_shell,
            "nodes_used": self.nodes_used,
            "certificate_delta": self.certificate_delta,
            "shell_ratio": self.shell_ratio,
        }


def _pairing_at(ev: CuspFormEvaluator, geo: Geodesic, nodes: int, workers: int) -> tuple:
    rule = build_rule(PERIODIC_TRAPEZOID, (0.0, geo.translation_length), nodes)
    velocity = geo.velocity(rule.nodes) ** ev.p
    evaluation = ev.evaluate(geo.position(rule.nodes), workers)
    value = complex(rule.integrate(evaluation.values * velocity))
    error = float(rule.integrate(evaluation.errors * np.abs(velocity)))
    last = float(rule.integrate(evaluation.shells[-1] * np.abs(velocity)))
    # last-shell share is measured against the absolute integrand
    scale = float(rule.integrate(np.abs(evaluation.values * velocity)))
    ratios = evaluation.shell_ratios
    ratio = float(np.nanmax(ratios)) if np.any(np.isfinite(ratios)) else math.nan
    return value, error, last / (scale + EPS), ratio


def geodesic_pairing(
    ev: CuspFormEvaluator,
    geo: Geodesic,
    nodes: Optional[int] = None,
    oversampling: float = 1.0,
    certify: bool = True,
    workers: int = 1,
) -> GeodesicPairing:
    """
    <s, s_geo> by the reproducing property: the period integral of
    s(gamma(t)) gamma'(t)^p, periodic trapezoid with max(64, 8 p l) nodes.

    Raises:
        TruncationNotConverged: the last shell exceeds shell_tol of the pairing
    """

    if geo.translation_length is None:
        raise ValidationError("pairing needs a closed geodesic")
    count = nodes or int(math.ceil(max(64, 8 * ev.p * geo.translation_length) * oversampling))
    value, error, share, ratio = _pairing_at(ev, geo, count, workers)
    if share > ev.shell_tol:
        raise TruncationNotConverged(f"last shell carries {share:.3e} of the pairing at p={ev.p}")

    delta = None
    if certify:
        refined, *_ = _pairing_at(ev, geo, 2 * count, workers)
        delta = abs(refined - value) / (abs(refined) + EPS)
    return GeodesicPairing(ev.p, value, error, share, count, delta, ratio)


def geodesic_norm(
    ev: CuspFormEvaluator,
    nodes: Optional[int] = None,
    oversampling: float = 1.0,
    certify: bool = True,
    workers: int = 1,
) -> GeodesicPairing:
    """||s||^2 of a geodesic series by the reproducing property over one period"""

    if ev.geodesic is None:
        raise ValidationError("norm needs a geodesic series")
    return geodesic_pairing(ev, ev.geodesic, nodes, oversampling, certify, workers)
