import math
from dataclasses import replace

import numpy as np
import pytest

from clifford import anticommutator_table, boost_frame, check_covariance, dirac_algebra, identity_residuals
from errors import SuperluminalVelocityError


def _random_velocities(count, limit=0.99, seed=3):
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(count, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    return directions * limit * rng.uniform(0.0, 1.0, size=(count, 1))


def test_alpha3_block_form():
    algebra = dirac_algebra()
    sigma3 = algebra.pauli[2]
    np.testing.assert_array_equal(algebra.alpha[2][:2, 2:], sigma3)
    np.testing.assert_array_equal(algebra.alpha[2][2:, :2], sigma3)
    np.testing.assert_array_equal(algebra.alpha[2][:2, :2], np.zeros((2, 2)))


def test_beta_squares_to_identity():
    beta = dirac_algebra().beta
    np.testing.assert_array_equal(beta @ beta, np.eye(4))


def test_gamma5_blocks():
    gamma5 = dirac_algebra().gamma5
    expected = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    np.testing.assert_allclose(gamma5, expected, atol=0)


def test_anticommutators_exact():
    table = anticommutator_table()
    assert all(value == 0.0 for value in table.values())


def test_one_dimensional_matrices():
    algebra = dirac_algebra()
    a, b = algebra.alpha1d, algebra.beta1d
    np.testing.assert_array_equal(a @ a, np.eye(2))
    np.testing.assert_array_equal(a @ b + b @ a, np.zeros((2, 2)))


def test_rest_frame_is_identity():
    frame = boost_frame([0.0, 0.0, 0.0])
    assert frame.gamma == 1.0
    np.testing.assert_array_equal(frame.s, np.eye(4))
    np.testing.assert_array_equal(frame.lam, np.eye(4))
    assert check_covariance(frame) == 0.0


def test_boost_along_x3_closed_form():
    frame = boost_frame([0.0, 0.0, 0.6])
    assert frame.gamma == pytest.approx(1.25, abs=1e-15)
    expected = math.sqrt(1.125) * (np.eye(4) + dirac_algebra().alpha[2] / 3.0)
    np.testing.assert_allclose(frame.s, expected, atol=1e-14)


def test_lambda_inverse():
    frame = boost_frame([0.3, 0.4, 0.0])
    np.testing.assert_allclose(frame.lam @ frame.lam_inv, np.eye(4), atol=1e-12)
    assert abs(np.linalg.det(frame.lam) - 1.0) < 1e-12


def test_superluminal_velocity_rejected():
    with pytest.raises(SuperluminalVelocityError) as info:
        boost_frame([0.0, 0.8, 0.6])
    assert info.value.speed == pytest.approx(1.0)
    with pytest.raises(ValueError):
        boost_frame(1.2)


def test_covariance_fast_boost():
    assert check_covariance(boost_frame([0.0, 0.0, 0.9])) <= 1e-12


def test_covariance_detects_missing_spinor_boost():
    frame = boost_frame([0.0, 0.0, 0.9])
    corrupted = replace(frame, s=np.eye(4, dtype=complex))
    assert check_covariance(corrupted) >= 0.99 * frame.gamma * 0.9


def test_random_frames_satisfy_all_identities():
    for v in _random_velocities(1000):
        residuals = identity_residuals(boost_frame(v))
        assert max(residuals.values()) <= 1e-11, (v, residuals)


@pytest.mark.parametrize("v", [0.3, -0.6, 0.9])
def test_line_frames(v):
    frame = boost_frame(v)
    assert frame.dim == 1
    assert frame.s.shape == (2, 2)
    residuals = identity_residuals(frame)
    assert max(residuals.values()) <= 1e-12


def test_contraction_matches_lambda_block():
    frame = boost_frame([0.1, -0.2, 0.5])
    np.testing.assert_allclose(frame.contraction(), frame.lam[1:, 1:], atol=1e-14)
