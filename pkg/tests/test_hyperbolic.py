import math

import numpy as np
import pytest

from isoq.errors import (
    NotElliptic,
    NotHyperbolic,
    NotInteger,
    NotInUpperHalfPlane,
    SameAxis,
    ValidationError,
    WordLengthTooSmall,
)
from isoq.hyperbolic.cosets import (
    PSL2,
    SL2,
    canonical_rep,
    coset_reps,
    orbifold_multiplicity,
    same_coset,
    saturation_width,
)
from isoq.hyperbolic.geodesics import (
    Geodesic,
    admissible_circle_radius,
    circle_holonomy,
    equivariance_residual,
    equivariant_circle,
    geodesic_from_hyperbolic,
    geodesic_section,
    hyperbolic_circle,
    section_equivariance_residual,
)
from isoq.hyperbolic.intersections import (
    axis_intersection,
    predict_geodesic_pairing,
    quotient_geodesic_intersections,
)
from isoq.hyperbolic.moebius import (
    IDENTITY,
    S,
    T,
    MoebiusElement,
    hyperbolic_kernel,
    j_factor,
    kernel_constant,
    moebius_apply,
    weighted_kernel,
)

G0 = MoebiusElement(2, 1, 1, 1)
G1 = MoebiusElement(2, 3, 1, 2)
PHI = (1 + math.sqrt(5)) / 2


def _random_element(rng):
    a = rng.uniform(0.5, 2.0)
    b, c = rng.uniform(-1.0, 1.0, size=2)
    return MoebiusElement(a, b, c, (1 + b * c) / a)


def _random_points(rng, n):
    return rng.uniform(-2.0, 2.0, n) + 1j * rng.uniform(0.2, 3.0, n)


# =========================================================================
# Moebius action and kernel
# =========================================================================


def test_determinant_must_be_one():
    with pytest.raises(ValidationError):
        MoebiusElement(1, 1, 1, 1)


def test_integral_rejects_fractions():
    with pytest.raises(NotInteger):
        MoebiusElement.integral((0.5, 0, 0, 2))
    assert MoebiusElement.integral((2.0, 1.0, 1.0, 1.0)).is_integral


@pytest.mark.parametrize("g,kind", [(G0, "hyperbolic"), (S, "elliptic"), (T, "parabolic"), (-G0, "hyperbolic")])
def test_kind(g, kind):
    assert g.kind == kind


def test_fixed_points_are_repelling_then_attracting():
    repelling, attracting = G0.fixed_points()
    assert repelling == pytest.approx(1 - PHI)
    assert attracting == pytest.approx(PHI)
    assert G0.apply_boundary(attracting) == pytest.approx(attracting)


def test_translation_length_is_twice_log_eigenvalue():
    assert G0.eigenvalue == pytest.approx(PHI**2)
    assert G0.translation_length == pytest.approx(2 * math.log(PHI**2))


def test_parabolic_has_no_axis():
    with pytest.raises(NotHyperbolic):
        T.fixed_points()


def test_elliptic_fixed_point():
    assert S.elliptic_fixed_point() == pytest.approx(1j)
    assert S.elliptic_order() == 2
    with pytest.raises(NotElliptic):
        G0.elliptic_fixed_point()


def test_group_operations():
    assert (G0.power(3) @ G0.power(-3)) == IDENTITY
    assert G0.conjugate_by(S).trace == G0.trace
    assert G0.power(0) == IDENTITY


def test_action_requires_upper_half_plane():
    with pytest.raises(NotInUpperHalfPlane):
        moebius_apply(G0, 1 - 1j)
    with pytest.raises(NotInUpperHalfPlane):
        j_factor(G0, np.array([1j, 2.0]))


def test_automorphy_factor_is_a_cocycle(rng):
    g, h = _random_element(rng), _random_element(rng)
    z = _random_points(rng, 8)
    assert np.allclose(j_factor(g @ h, z), j_factor(g, moebius_apply(h, z)) * j_factor(h, z))


@pytest.mark.parametrize("p,value", [(1, 1 / (4 * math.pi)), (2, 3 / (4 * math.pi))])
def test_kernel_at_i(p, value):
    assert abs(hyperbolic_kernel(p, 1j, 1j) - value) < 1e-12


def test_kernel_constant():
    assert kernel_constant(3) == pytest.approx(16 * 5 / math.pi)


def test_weighted_kernel_is_invariant(rng):
    z = _random_points(rng, 5)
    w = _random_points(rng, 5)
    for _ in range(20):
        g = _random_element(rng)
        for p in (1, 4, 9):
            moved = weighted_kernel(p, moebius_apply(g, z), moebius_apply(g, w))
            assert np.allclose(moved, weighted_kernel(p, z, w), rtol=1e-9, atol=0)


# =========================================================================
# Cosets
# =========================================================================


def test_depth_zero_is_the_identity_coset():
    table = coset_reps(G0, 0)
    assert len(table) == 1
    assert same_coset(table.representatives[0], IDENTITY, G0)


def test_representatives_are_distinct_cosets():
    table = coset_reps(G0, 3)
    reps = table.representatives
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            assert not same_coset(reps[i], reps[j], G0)


def test_table_is_sorted_into_shells():
    table = coset_reps(G0, 4)
    assert table.depths == sorted(table.depths)
    assert sum(table.shell_sizes()) == len(table)
    assert table.shell_sizes()[0] == 1
    assert table.to_dict()["size"] == len(table)
    assert all(c.trace == G0.trace for c in table.conjugates())


def test_deeper_tables_extend_shallower_ones():
    small = {g.as_tuple() for g in coset_reps(G0, 3)}
    large = {g.as_tuple() for g in coset_reps(G0, 5)}
    assert small <= large


@pytest.mark.parametrize("k", [-3, -1, 1, 2, 4])
def test_canonical_rep_is_a_coset_invariant(k):
    g = S @ T @ T
    assert canonical_rep(g @ G0.power(k), G0) == canonical_rep(g, G0)
    assert canonical_rep(-g, G0) == canonical_rep(g, G0)


def test_same_coset():
    assert same_coset(S, S @ G0.power(3), G0)
    assert not same_coset(S, T, G0)


def test_saturation_adds_translates():
    plain = coset_reps(G0, 2)
    padded = coset_reps(G0, 2, saturation=3)
    assert len(padded) > len(plain)
    assert any(padded.edge)
    assert padded.depths == sorted(padded.depths)


def test_elliptic_subgroup_table():
    table = coset_reps(S, 3)
    assert table.order == 2
    assert len(table) > 1


def test_coset_errors():
    with pytest.raises(WordLengthTooSmall):
        coset_reps(G0, -1)
    with pytest.raises(NotHyperbolic):
        coset_reps(T, 3)
    with pytest.raises(ValidationError):
        coset_reps(G0, 3, convention="gl2")


def test_orbifold_multiplicity():
    assert orbifold_multiplicity(PSL2, G0) == 1
    assert orbifold_multiplicity(SL2, G0) == 2
    assert orbifold_multiplicity(SL2, S) == 1
    with pytest.raises(ValidationError):
        orbifold_multiplicity("gl2", G0)


@pytest.mark.parametrize("p,width", [(1, 200), (7, 30), (100, 4)])
def test_saturation_width(p, width):
    assert saturation_width(p) == width


# =========================================================================
# Geodesics and sections
# =========================================================================


def test_axis_of_g0():
    geo = geodesic_from_hyperbolic(G0)
    assert geo.center == pytest.approx(0.5)
    assert geo.radius == pytest.approx(math.sqrt(5) / 2)
    assert equivariance_residual(geo) < 1e-10
    t = np.linspace(-2.0, 2.0, 9)
    assert np.allclose(geo.parameter_of(geo.position(t)), t)
    assert np.allclose(geo.distance_to(geo.position(t)), 0.0, atol=1e-7)


def test_geodesic_is_unit_speed():
    geo = geodesic_from_hyperbolic(G1)
    t = np.linspace(0.0, geo.translation_length, 11)
    speed = np.abs(geo.velocity(t)) / np.imag(geo.position(t))
    assert np.allclose(speed, 1.0)


def test_vertical_geodesic():
    geo = Geodesic(0.0, math.inf)
    assert geo.position(0.0) == pytest.approx(1j)
    assert geo.distance_to(np.array([math.sinh(1.0) + 1j * 1.0]))[0] == pytest.approx(1.0)


def test_degenerate_geodesic():
    with pytest.raises(ValidationError):
        Geodesic(1.0, 1.0)


def test_image_under_generator_is_the_same_axis():
    geo = geodesic_from_hyperbolic(G0)
    assert geo.image(G0).same_axis(geo)
    assert not geo.image(T).same_axis(geo)


def test_section_is_unit_flat_and_equivariant():
    geo = geodesic_from_hyperbolic(G0)
    c = geodesic_section(geo)
    t = np.linspace(0.0, geo.translation_length, 7)
    assert np.allclose(np.abs(c(t)) * np.imag(geo.position(t)), 1.0)
    assert section_equivariance_residual(geo) < 1e-10


# =========================================================================
# Circles
# =========================================================================


@pytest.mark.parametrize("p,m", [(4, 1), (10, 3)])
def test_admissible_circle_has_trivial_holonomy(p, m):
    rho = admissible_circle_radius(p, m)
    assert p * (math.cosh(rho) - 1) == pytest.approx(m)
    assert circle_holonomy(1j, rho, p).admissible


def test_generic_circle_is_not_admissible():
    assert not circle_holonomy(2j, 0.3, 5).admissible


def test_circle_geometry():
    circle = hyperbolic_circle(0.5 + 2j, 0.8)
    phi = np.linspace(0.0, 2 * math.pi, 13)
    z = circle.position(phi)
    w = complex(circle.center)
    cosh_d = 1 + np.abs(z - w) ** 2 / (2 * z.imag * w.imag)
    assert np.allclose(cosh_d, math.cosh(0.8))
    assert np.allclose(circle.speed(phi), math.sinh(0.8))


def test_circle_validation():
    with pytest.raises(NotInUpperHalfPlane):
        hyperbolic_circle(-1j, 1.0)
    with pytest.raises(ValidationError):
        hyperbolic_circle(1j, 0.0)
    with pytest.raises(ValidationError):
        admissible_circle_radius(0, 1)


def test_equivariant_circle_about_i():
    circle = equivariant_circle(S, 6)
    assert len(circle) % circle.order == 0
    assert circle.holonomy_residual < 1e-8
    assert circle.circle.center == pytest.approx(1j)


# =========================================================================
# Crossings
# =========================================================================


def test_axis_intersection():
    assert axis_intersection(Geodesic(0.0, math.inf), Geodesic(-1.0, 1.0)) == pytest.approx(1j)
    assert axis_intersection(Geodesic(-1.0, 1.0), Geodesic(2.0, 3.0)) is None
    assert axis_intersection(Geodesic(-2.0, 2.0), Geodesic(-1.0, 1.0)) is None


def test_quotient_crossings_lie_on_both_axes():
    geo1 = geodesic_from_hyperbolic(G0)
    geo2 = geodesic_from_hyperbolic(G1)
    crossings = quotient_geodesic_intersections(geo1, geo2, coset_reps(G1, 6), strict=False)
    assert crossings
    for x in crossings:
        assert 0 <= x.t1 < geo1.translation_length
        assert 0 <= x.t2 < geo2.translation_length
        assert abs(x.lam) == pytest.approx(1.0, rel=1e-9)
        assert abs(math.sin(x.angle)) > 1e-6
        assert geo1.distance_to(np.array([x.point]))[0] < 1e-6
        lift = geo2.image(MoebiusElement(*x.element))
        assert lift.distance_to(np.array([x.point]))[0] < 1e-6
        assert x.to_dict()["depth"] == x.depth
    assert [x.t1 for x in crossings] == sorted(x.t1 for x in crossings)


def test_predicted_pairing_scales_with_multiplicity():
    geo1 = geodesic_from_hyperbolic(G0)
    geo2 = geodesic_from_hyperbolic(G1)
    crossings = quotient_geodesic_intersections(geo1, geo2, coset_reps(G1, 6), strict=False)
    single = predict_geodesic_pairing(crossings, 10)
    assert predict_geodesic_pairing(crossings, 10, multiplicity=2) == pytest.approx(2 * single)
    bound = sum(abs(x.b0()) for x in crossings)
    assert abs(single) <= bound * (1 + 1e-12)


def test_same_axis_is_rejected():
    geo = geodesic_from_hyperbolic(G0)
    with pytest.raises(SameAxis):
        quotient_geodesic_intersections(geo, geo, coset_reps(G0, 2), strict=False)


def test_crossings_need_the_matching_table():
    geo1 = geodesic_from_hyperbolic(G0)
    geo2 = geodesic_from_hyperbolic(G1)
    with pytest.raises(ValidationError):
        quotient_geodesic_intersections(geo1, geo2, coset_reps(G0, 2))
