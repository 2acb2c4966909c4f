import cmath
import math

import numpy as np
import pytest

from isoq.bargmann import (
    CircleSpec,
    bargmann_kernel,
    bohr_sommerfeld_order,
    circle_intersection_terms,
    common_admissible_p,
    concentration_profile,
    get_symbol,
    holonomy_report,
    inner_product,
    intersect_circles,
    is_admissible,
    make_bs_circle,
    node_count,
    norm_sq,
    predict_curve_b0,
    reproducing_residual,
    signed_area,
    snap_radius,
    to_point,
    toeplitz_inner,
)
from isoq.curves import ParametrizedCurve
from isoq.errors import (
    NotBohrSommerfeldAtLevelP,
    OpenCurve,
    PowerMismatch,
    TangentCircles,
    ValidationError,
)


def _level(radius, p):
    return round(p * math.pi * radius**2)


def _exact_norm_sq(radius, p):
    """Circle states centred at 0 are multiples of z^N: closed-form norm"""
    n = _level(radius, p)
    return math.exp(math.log(4 * math.pi**2 * radius**2 * p) + n * math.log(n) - n - math.lgamma(n + 1))


# =========================================================================
# Kernel and oracles
# =========================================================================


def test_kernel_diagonal_is_p():
    x = np.array([0.4, -1.1])
    assert bargmann_kernel(20, x, x) == pytest.approx(20.0)


def test_kernel_is_hermitian(rng):
    x, y = rng.normal(size=(2, 2))
    assert bargmann_kernel(7, x, y) == pytest.approx(np.conj(bargmann_kernel(7, y, x)))


def test_to_point():
    assert np.allclose(to_point(1 + 2j), [1.0, 2.0])


@pytest.mark.parametrize("x,z", [((0.0, 0.0), (0.0, 0.0)), ((0.1, 0.2), (0.3, -0.1)), ((-0.5, 0.4), (0.2, 0.9))])
def test_reproducing_property(x, z):
    assert reproducing_residual(10, np.array(x), np.array(z)) < 1e-8


# =========================================================================
# Holonomy and admissibility
# =========================================================================


def test_signed_area_of_circle():
    curve = ParametrizedCurve.circle(0.3 + 0.2j, 0.7)
    assert signed_area(curve) == pytest.approx(math.pi * 0.49, rel=1e-12)


def test_holonomy_shoelace_agrees_with_transport():
    report = holonomy_report(ParametrizedCurve.circle(0.3 + 0.2j, 0.7), 5)
    assert abs(report.shoelace - report.ode) < 1e-8
    assert report.to_dict()["admissible"] == report.admissible


def test_point_curve_is_trivially_admissible():
    report = holonomy_report(ParametrizedCurve.point(1 + 1j), 3)
    assert report.admissible
    assert report.order == 1


def test_open_curve_is_rejected():
    curve = ParametrizedCurve(
        period=1.0,
        position=lambda t: np.stack([np.asarray(t), np.zeros_like(t)], axis=-1),
        velocity=lambda t: np.stack([np.ones_like(t), np.zeros_like(t)], axis=-1),
    )
    with pytest.raises(OpenCurve):
        holonomy_report(curve, 1)


def test_third_of_a_unit_area_has_order_three():
    curve = ParametrizedCurve.circle(0j, math.sqrt(1 / (3 * math.pi)))
    assert bohr_sommerfeld_order(curve, 1) == 3
    assert bohr_sommerfeld_order(curve, 3) == 1


@pytest.mark.parametrize("p", [1, 7, 20, 333])
def test_snapped_radius_is_admissible(p):
    r = snap_radius(1.0, p)
    assert is_admissible(r, p)
    assert abs(r - 1.0) < 1.0 / p


def test_unit_circle_is_not_admissible_at_p20():
    assert not is_admissible(1.0, 20)
    with pytest.raises(NotBohrSommerfeldAtLevelP):
        make_bs_circle(1.0, 20)


def test_common_admissible_p():
    assert common_admissible_p([0.5, 0.25], [1, 2, 3, 4, 6, 8]) == [4, 8]


@pytest.mark.parametrize("radius", [0.0, -1.0])
def test_nonpositive_radius(radius):
    with pytest.raises(ValidationError):
        make_bs_circle(radius, 10)


def test_node_count_rule():
    assert node_count(1, 0.1) == 64
    assert node_count(100, 1.0) == 160
    assert node_count(100, 1.0, oversampling=2.0) == 320
    assert node_count(1, 0.1, minimum=10) == 10
    assert node_count(100, 1.0, per_unit=32) == 320


def test_circle_node_rule_overrides():
    r = snap_radius(1.0, 20)
    _, default = make_bs_circle(r, 20)
    _, dense = make_bs_circle(r, 20, min_nodes=1000)
    _, sparse = make_bs_circle(r, 20, nodes_per_unit=8)
    assert len(dense.nodes) == 1000
    assert len(sparse.nodes) < len(default.nodes)


# =========================================================================
# States and pairings
# =========================================================================


def test_state_payload_is_unit_section(unit_circle_20):
    curve, state = unit_circle_20
    assert np.allclose(np.abs(curve.section_values), 1.0)
    assert len(state) == len(curve.t_nodes)


@pytest.mark.parametrize("p", [20, 100])
def test_norm_matches_monomial_closed_form(p):
    r = snap_radius(1.0, p)
    _, state = make_bs_circle(r, p)
    assert norm_sq(state) == pytest.approx(_exact_norm_sq(r, p), rel=1e-9)


def test_norm_leading_term_at_p100():
    p = 100
    r = snap_radius(1.0, p)
    _, state = make_bs_circle(r, p)
    leading = math.sqrt(2) * 2 * math.pi * r * math.sqrt(p)
    assert norm_sq(state) / leading == pytest.approx(1.0, abs=0.01)
    assert predict_curve_b0(state) == pytest.approx(math.sqrt(2) * 2 * math.pi * r, rel=1e-12)


def test_state_is_linear_in_amplitude(unit_circle_20, rng):
    _, state = unit_circle_20
    a = rng.normal(size=len(state)) + 1j * rng.normal(size=len(state))
    b = rng.normal(size=len(state))
    x = rng.normal(size=(6, 2))
    sa = state.with_payload(state.payload * a).evaluate(x)
    sb = state.with_payload(state.payload * b).evaluate(x)
    sab = state.with_payload(state.payload * (a + b)).evaluate(x)
    assert np.allclose(sab, sa + sb, rtol=1e-12, atol=1e-12 * np.max(np.abs(sab)))


def test_zero_amplitude_gives_zero_state():
    _, state = make_bs_circle(snap_radius(1.0, 10), 10, f=lambda t: np.zeros_like(t))
    assert state.evaluate(np.array([1.0, 0.0])) == 0


def test_inner_product_is_conjugate_symmetric():
    p = 40
    r = snap_radius(1.0, p)
    _, s1 = make_bs_circle(r, p, f=lambda t: 1 + 0.5 * np.cos(t))
    _, s2 = make_bs_circle(r, p, center=0.5 + 0j)
    forward = inner_product(s1, s2)
    assert forward == pytest.approx(np.conj(inner_product(s2, s1)), rel=1e-10)


def test_inner_product_requires_same_power():
    _, s1 = make_bs_circle(snap_radius(1.0, 10), 10)
    _, s2 = make_bs_circle(snap_radius(1.0, 11), 11)
    with pytest.raises(PowerMismatch):
        inner_product(s1, s2)


def test_shifted_section_pairing_is_exact():
    p, phi = 30, 0.5
    r = snap_radius(1.0, p)
    _, s1 = make_bs_circle(r, p)
    _, s2 = make_bs_circle(r, p, phase_shift=phi)
    expected = cmath.exp(-1j * p * phi) * norm_sq(s1)
    assert inner_product(s1, s2) == pytest.approx(expected, rel=1e-12)


def test_concentric_circles_are_orthogonal():
    p = 100
    _, s1 = make_bs_circle(snap_radius(0.5, p), p)
    _, s2 = make_bs_circle(snap_radius(1.0, p), p)
    assert abs(inner_product(s1, s2)) < 1e-6


def test_transverse_circles_match_leading_terms():
    p = 300
    r = snap_radius(1.0, p)
    c1, s1 = make_bs_circle(r, p)
    c2, s2 = make_bs_circle(r, p, center=1 + 0j)
    value = inner_product(s1, s2)
    predicted = sum(t.value(p) for t in circle_intersection_terms(c1, c2))
    ratio = value / predicted
    assert abs(abs(ratio) - 1.0) < 0.05
    assert abs(cmath.phase(ratio)) < 0.1


def test_pairing_is_independent_of_worker_count():
    p = 300
    r = snap_radius(1.0, p)
    _, s1 = make_bs_circle(r, p)
    _, s2 = make_bs_circle(r, p, center=1 + 0j)
    assert len(s1) > 1024
    assert inner_product(s1, s2, workers=1) == inner_product(s1, s2, workers=4)


# =========================================================================
# Toeplitz elements
# =========================================================================


def test_toeplitz_of_one_is_the_norm(unit_circle_20):
    _, state = unit_circle_20
    assert toeplitz_inner(get_symbol("one"), state, state) == pytest.approx(norm_sq(state), rel=1e-6)


def test_toeplitz_of_u2_matches_monomial_moment():
    # <|z|^2> = (N + 1) / (pi p) for z^N, and u^2 carries half of it
    p = 20
    r = snap_radius(1.0, p)
    _, state = make_bs_circle(r, p)
    n = _level(r, p)
    expected = norm_sq(state) * (n + 1) / (2 * math.pi * p)
    assert toeplitz_inner(get_symbol("u2"), state, state) == pytest.approx(expected, rel=1e-6)


def test_toeplitz_predictor_for_u2():
    _, state = make_bs_circle(snap_radius(1.0, 40), 40)
    assert predict_curve_b0(state, get_symbol("u2")) == pytest.approx(math.sqrt(2) * math.pi, rel=0.02)


def test_unknown_symbol():
    with pytest.raises(ValidationError):
        get_symbol("w3")


# =========================================================================
# Concentration
# =========================================================================


def test_state_concentrates_with_gaussian_profile():
    p = 50
    r = snap_radius(1.0, p)
    _, state = make_bs_circle(r, p)
    profile = concentration_profile(state, np.array([r, 0.0]), np.array([1.0, 0.0]), np.linspace(-0.15, 0.15, 11))
    assert profile.relative_rate_error < 0.02
    assert profile.meets_kernel_bound


# =========================================================================
# Circle intersections
# =========================================================================


def test_unit_circles_cross_at_sixty_degrees():
    hits = intersect_circles(CircleSpec(0j, 1.0), CircleSpec(1 + 0j, 1.0))
    assert sorted(h.theta for h in hits) == pytest.approx([math.pi / 3, 5 * math.pi / 3])
    for h in hits:
        assert h.point[0] == pytest.approx(0.5)
        assert abs(h.point[1]) == pytest.approx(math.sqrt(3) / 2)


@pytest.mark.parametrize("c2", [CircleSpec(5 + 0j, 1.0), CircleSpec(0j, 0.5)])
def test_disjoint_circles_have_no_intersections(c2):
    assert intersect_circles(CircleSpec(0j, 1.0), c2) == []


@pytest.mark.parametrize("c2", [CircleSpec(2 + 0j, 1.0), CircleSpec(0.5 + 0j, 0.5)])
def test_tangent_circles(c2):
    with pytest.raises(TangentCircles):
        intersect_circles(CircleSpec(0j, 1.0), c2)


def test_coincident_circles():
    with pytest.raises(ValidationError):
        intersect_circles(CircleSpec(0j, 1.0), CircleSpec(0j, 1.0))


def test_intersection_terms_have_angle_modulus():
    p = 100
    r = snap_radius(1.0, p)
    c1, _ = make_bs_circle(r, p)
    c2, _ = make_bs_circle(r, p, center=1 + 0j)
    terms = circle_intersection_terms(c1, c2)
    assert len(terms) == 2
    for t in terms:
        assert abs(t.lam) == pytest.approx(1.0)
        assert abs(t.b0) ** 2 == pytest.approx(2 / abs(math.sin(t.theta)), rel=1e-6)
