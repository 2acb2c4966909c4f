import math

import numpy as np
import pytest

from isoq.errors import GridTooCoarse, NotInUpperHalfPlane, ValidationError, WeightTooSmall, WordLengthTooSmall
from isoq.hyperbolic.cosets import coset_reps, saturation_width
from isoq.hyperbolic.geodesics import Geodesic, equivariant_circle
from isoq.hyperbolic.moebius import S, T, MoebiusElement
from isoq.hyperbolic.petersson import compare_routes, petersson_norm
from isoq.hyperbolic.series import (
    elliptic_series,
    elliptic_series_evaluator,
    geodesic_pairing,
    geodesic_series,
    katok_constant,
    measure_katok_constant,
    modularity_check,
    modularity_residual,
    nonvanishing_witness,
    relative_poincare_series,
    sample_points,
)

G0 = MoebiusElement(2, 1, 1, 1)


def _discriminant(z, terms=60):
    q = np.exp(2j * np.pi * np.asarray(z))
    prod = np.ones_like(q)
    for n in range(1, terms + 1):
        prod = prod * (1 - q**n) ** 24
    return q * prod


@pytest.fixture(scope="module")
def series_p6():
    return geodesic_series(G0, 6, word_length=8)


# =========================================================================
# Katok normalisation
# =========================================================================


@pytest.mark.parametrize("p", [2, 6, 12])
def test_measured_katok_constant_matches_closed_form(p):
    measurement = measure_katok_constant(p, G0)
    assert measurement.relative_error < 1e-8
    assert measurement.certificate_delta < 1e-10


def test_katok_constant_sign_follows_trace():
    assert katok_constant(3, -G0) == pytest.approx(-katok_constant(3, G0))
    assert katok_constant(4, -G0) == pytest.approx(katok_constant(4, G0))


# =========================================================================
# Evaluation
# =========================================================================


def test_weight_must_be_at_least_four():
    with pytest.raises(WeightTooSmall):
        geodesic_series(G0, 1, word_length=2)


def test_points_must_be_in_upper_half_plane(series_p6):
    with pytest.raises(NotInUpperHalfPlane):
        series_p6.evaluate([0.5 - 0.1j])


def test_evaluation_is_independent_of_worker_count(series_p6):
    z = sample_points(150, seed=3)
    one = series_p6.evaluate(z, workers=1).values
    many = series_p6.evaluate(z, workers=4).values
    assert np.array_equal(one, many)


def test_shells_and_errors(series_p6):
    evaluation = series_p6.evaluate(sample_points(4))
    assert evaluation.shells.shape == (9, 4)
    assert np.all(evaluation.errors >= evaluation.shells[-1])


def test_translation_invariance(series_p6):
    for z in sample_points(5, seed=1):
        assert modularity_check(series_p6, T, z).residual < 1e-10


def test_scalar_call(series_p6):
    z = 0.1 + 1.2j
    assert series_p6(z) == series_p6.evaluate([z]).values[0]


def test_sample_points_lie_in_the_strip():
    z = sample_points(50, seed=7)
    assert np.all(np.abs(z.real) <= 0.5)
    assert np.all((z.imag >= 0.9) & (z.imag <= 1.8))
    assert np.array_equal(z, sample_points(50, seed=7))


def test_nonvanishing_at_weight_twenty():
    ev = geodesic_series(G0, 10, word_length=8)
    witness = nonvanishing_witness(ev, sample_points(5))
    assert witness.witnessed
    assert witness.to_dict()["weight"] == 20


def test_relative_series_needs_two_shells():
    with pytest.raises(WordLengthTooSmall):
        relative_poincare_series(6, G0, 1j, coset_reps(G0, 1))


def test_relative_series_rejects_foreign_table():
    with pytest.raises(ValidationError):
        relative_poincare_series(6, G0, 1j, coset_reps(MoebiusElement(2, 3, 1, 2), 3))


# =========================================================================
# Elliptic series
# =========================================================================


def test_elliptic_series_is_translation_invariant():
    circle = equivariant_circle(S, 6)
    ev = elliptic_series_evaluator(circle, word_length=6)
    assert modularity_residual(ev, T, 0.2 + 1.1j) < 1e-8


def test_elliptic_series_checks_its_circle():
    circle = equivariant_circle(S, 6)
    with pytest.raises(ValidationError):
        elliptic_series(8, S, circle, 1j, coset_reps(S, 2))


# =========================================================================
# Pairings and norms
# =========================================================================


def test_pairing_needs_closed_geodesic(series_p6):
    with pytest.raises(ValidationError):
        geodesic_pairing(series_p6, Geodesic(0.0, math.inf))


def test_petersson_height_floor(series_p6):
    with pytest.raises(ValidationError):
        petersson_norm(series_p6, y_max=5.0)


def test_petersson_doubling_tolerance(series_p6):
    with pytest.raises(GridTooCoarse):
        petersson_norm(series_p6, grid=8, tol=-1.0)


@pytest.mark.slow
def test_unfolded_quadrature_reproduces_katok_form():
    table = coset_reps(G0, 8, saturation=saturation_width(10))
    value = relative_poincare_series(10, G0, 0.1 + 1.3j, table)
    assert abs(value.proportionality / value.kappa_analytic - 1) < 1e-8


@pytest.mark.slow
def test_weight_twelve_series_is_modular_and_a_multiple_of_delta():
    ev = geodesic_series(G0, 6, word_length=12)
    points = sample_points(5)
    for z in points:
        assert modularity_check(ev, S, z).passed
        assert modularity_check(ev, T, z).residual < 1e-12
    ratios = ev.evaluate(points).values / _discriminant(points)
    assert np.allclose(ratios, ratios[0], rtol=1e-6)


@pytest.mark.slow
def test_norm_routes_agree():
    ev = geodesic_series(G0, 10, word_length=12)
    comparison = compare_routes(ev)
    assert comparison.agree
    assert comparison.reproducing.value.real > 0
