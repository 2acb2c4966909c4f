import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoq.errors import (
    DimensionMismatch,
    NotIsotropic,
    NotLagrangian,
    OverlappingSubspaces,
    TangentialIntersection,
    ValidationError,
)
from isoq.localmodel import (
    IsotropicFrame,
    LocalKernelParams,
    angle_coefficient,
    gaussian_pair_integral,
    model_kernel,
    omega,
    predict_intersection_b0,
    predict_norm_b0,
    smallest_principal_sine,
)

FLAT = LocalKernelParams()
THETAS = np.linspace(0.05, math.pi - 0.05, 41)


def test_omega_is_the_standard_pairing():
    assert omega(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(1.0)
    assert omega(np.array([0.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(-1.0)


def test_kernel_on_the_diagonal_is_the_density():
    params = LocalKernelParams(n=2, det_rl_over_2pi=3.0)
    z = np.array([0.3, -1.2, 0.5, 2.0])
    assert model_kernel(params, z, z) == pytest.approx(3.0)


def test_kernel_is_hermitian(rng):
    z, w = rng.normal(size=(2, 2))
    assert model_kernel(FLAT, z, w) == pytest.approx(np.conj(model_kernel(FLAT, w, z)))


def test_kernel_broadcasts():
    z = np.zeros((5, 1, 2))
    w = np.ones((1, 3, 2))
    assert model_kernel(FLAT, z, w).shape == (5, 3)


def test_kernel_rejects_wrong_dimension():
    with pytest.raises(DimensionMismatch):
        model_kernel(FLAT, np.zeros(3), np.zeros(3))


@pytest.mark.parametrize("n,det", [(0, 1.0), (1, 0.0), (1, -2.0)])
def test_params_validate(n, det):
    with pytest.raises((DimensionMismatch, ValidationError)):
        LocalKernelParams(n=n, det_rl_over_2pi=det)


# =========================================================================
# Frames
# =========================================================================


def test_frame_must_be_orthonormal():
    with pytest.raises(NotIsotropic):
        IsotropicFrame(2, np.array([[2.0, 0.0]]))


def test_frame_must_be_isotropic():
    # (u1, v1) span a symplectic plane in R^4
    with pytest.raises(NotIsotropic):
        IsotropicFrame(4, np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]))


def test_lagrangian_plane_in_r4():
    frame = IsotropicFrame(4, np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]))
    assert frame.is_lagrangian
    assert frame.n == 2


def test_principal_sine_of_lines():
    assert smallest_principal_sine(IsotropicFrame.line(0.0), IsotropicFrame.line(math.pi / 6)) == pytest.approx(0.5)


# =========================================================================
# Predictors
# =========================================================================


def test_norm_predictor_scales_with_dimension():
    assert predict_norm_b0(1, 2 * math.pi) == pytest.approx(math.sqrt(2) * 2 * math.pi)
    assert predict_norm_b0(2, 1.0, det_factor=0.5) == pytest.approx(1.0)


def test_angle_coefficient_at_right_angle():
    assert angle_coefficient(math.pi / 2) == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("theta", [0.0, math.pi, 2 * math.pi, 1e-10])
def test_angle_coefficient_rejects_tangency(theta):
    with pytest.raises(TangentialIntersection):
        angle_coefficient(theta)


@settings(max_examples=60, deadline=None)
@given(theta=st.floats(min_value=0.01, max_value=2 * math.pi - 0.01).filter(lambda t: abs(t - math.pi) > 0.01))
def test_angle_coefficient_modulus(theta):
    assert abs(angle_coefficient(theta)) ** 2 == pytest.approx(2 / abs(math.sin(theta)), rel=1e-12)


@pytest.mark.parametrize("theta", THETAS)
def test_intersection_predictor_matches_angle_coefficient(theta):
    b0 = predict_intersection_b0(IsotropicFrame.line(theta), IsotropicFrame.line(0.0))
    assert abs(b0 - angle_coefficient(math.pi - theta)) < 1e-10
    assert abs(b0 - angle_coefficient(2 * math.pi - theta)) < 1e-10


def test_intersection_predictor_with_empty_frames_is_the_prefactor():
    b0 = predict_intersection_b0(IsotropicFrame.empty(), IsotropicFrame.empty(), fF_pairing=3.0)
    assert b0 == pytest.approx(3.0 * math.sqrt(2))


def test_intersection_predictor_rejects_mixed_ambients():
    with pytest.raises(DimensionMismatch):
        predict_intersection_b0(IsotropicFrame.line(0.0), IsotropicFrame.empty(4))


@pytest.mark.parametrize("theta", THETAS[::5])
def test_pair_integral_matches_angle_coefficient(theta):
    value = gaussian_pair_integral(IsotropicFrame.line(0.0), IsotropicFrame.line(theta))
    assert abs(value - angle_coefficient(math.pi - theta)) < 1e-10


def test_pair_integral_matches_brute_force():
    theta = math.pi / 3
    e = np.array([1.0, 0.0])
    nu = np.array([math.cos(theta), math.sin(theta)])
    x = np.linspace(-8.0, 8.0, 641)
    h = x[1] - x[0]
    s, t = np.meshgrid(x, x, indexing="ij")
    u = s[..., None] * e
    w = t[..., None] * nu
    grid = complex(np.sum(model_kernel(FLAT, w, u)) * h * h)
    closed = gaussian_pair_integral(IsotropicFrame.line(0.0), IsotropicFrame.line(theta))
    assert abs(grid - closed) / abs(closed) < 1e-8


def test_pair_integral_rejects_same_line():
    with pytest.raises(OverlappingSubspaces):
        gaussian_pair_integral(IsotropicFrame.line(0.3), IsotropicFrame.line(0.3 + math.pi))


def test_pair_integral_needs_lagrangian_first_frame():
    with pytest.raises(NotLagrangian):
        gaussian_pair_integral(IsotropicFrame.empty(), IsotropicFrame.line(0.0))
