import math

import numpy as np
import pytest

from profiles import (
    FastCubic, NonlinearityModel, RadialProfile, closed_form_center_1d, decay_rate, first_integral_1d,
    ode_residual, rk4_crosscheck, solve_soler_radial,
)


def test_model_validation():
    with pytest.raises(ValueError):
        NonlinearityModel("soler_linear", 1.0, 2.0)
    with pytest.raises(ValueError):
        NonlinearityModel.power(-1.0, 2.0)
    with pytest.raises(ValueError):
        NonlinearityModel.power(1.0, 0.5)
    with pytest.raises(ValueError):
        NonlinearityModel("cubic", 1.0, 1.0)


def test_model_functions():
    model = NonlinearityModel.power(2.0, 2.0)
    s = np.array([-1.5, 0.0, 0.5, 2.0])
    np.testing.assert_allclose(model.g(s), 2.0 * np.sign(s) * s ** 2)
    np.testing.assert_allclose(model.G(s), 2.0 * np.abs(s) ** 3 / 3.0)
    assert model.theta == 3.0
    assert model.satisfies_growth()
    assert model.scalar_g()(-1.5) == pytest.approx(-4.5)
    zero = NonlinearityModel.zero()
    assert zero.is_zero
    assert np.all(zero.G(s) == 0.0)


def test_fast_cubic_matches_values_and_vanishes_outside():
    grid = np.linspace(0.0, 4.0, 401)
    cubic = FastCubic(grid, np.exp(-grid))
    assert cubic(1.234) == pytest.approx(math.exp(-1.234), abs=1e-9)
    assert cubic(4.5) == 0.0
    assert cubic.scaled(3.0)(1.234) == pytest.approx(3.0 * cubic(1.234), rel=1e-14)


def test_profile_rejects_bad_frequency():
    grid = np.linspace(0.0, 1.0, 11)
    with pytest.raises(ValueError):
        RadialProfile("dirac3d_plus", 1.2, 1.0, grid, grid, grid)
    with pytest.raises(ValueError):
        solve_soler_radial(1.0, 1.0, NonlinearityModel.soler())


def test_profile_needs_chi_for_kgd():
    grid = np.linspace(0.0, 1.0, 11)
    with pytest.raises(ValueError):
        RadialProfile("kgd3d", 0.5, 1.0, grid, grid, grid)


def test_zero_nonlinearity_has_no_amplitude_solution():
    with pytest.raises(ValueError):
        solve_soler_radial(0.9, 1.0, NonlinearityModel.zero())


@pytest.mark.parametrize("name", ["profile_09", "profile_07"])
def test_soler_ground_states_certified(name, request):
    profile = request.getfixturevalue(name)
    assert profile.kind == "dirac3d_plus"
    assert profile.residual <= 1e-8
    assert ode_residual(profile) <= 1e-8
    assert profile.u[0] == 0.0
    assert profile.v[0] > 0
    assert profile.nodes == 0
    assert profile.decay == pytest.approx(profile.kappa, rel=1e-2)


def test_ground_state_is_localized(profile_09):
    peak = np.max(np.abs(profile_09.v))
    assert abs(profile_09.v[-1]) < 1e-4 * peak
    assert np.all(profile_09.v > 0)


def test_rk4_oracle_agrees(profile_09):
    assert rk4_crosscheck(profile_09) <= 1e-6


def test_minus_branch_vanishes_at_origin(minus_profile_09):
    assert minus_profile_09.kind == "dirac3d_minus"
    assert minus_profile_09.sign == -1
    assert minus_profile_09.odd[0] == 0.0
    assert minus_profile_09.v[0] == 0.0
    assert ode_residual(minus_profile_09) <= 1e-8


def test_scaled_profile_fails_certification(profile_09):
    edited = profile_09.scaled(u=1.05)
    assert edited.residual is None
    assert ode_residual(edited) >= 1e-3


def test_line_profile_closed_form(line_profile_05, soler):
    assert line_profile_05.kind == "dirac1d"
    assert line_profile_05.residual <= 1e-10
    assert line_profile_05.v[0] == pytest.approx(closed_form_center_1d(0.5, 1.0, soler), rel=1e-8)


def test_line_profile_first_integral(line_profile_05):
    assert np.max(np.abs(first_integral_1d(line_profile_05))) <= 1e-8


def test_first_integral_only_in_one_dimension(profile_09):
    with pytest.raises(ValueError):
        first_integral_1d(profile_09)


def test_decay_rate_fit(profile_07):
    fit = decay_rate(profile_07, prefactor=True)
    assert fit.kappa == pytest.approx(math.sqrt(1.0 - 0.49), rel=1e-2)
    assert decay_rate(profile_07).kappa > fit.kappa


@pytest.mark.parametrize("kind", ["dirac1d", "dirac3d_plus"])
def test_decay_rate_of_pure_exponential(kind):
    grid = np.linspace(0.0, 20.0, 2001)
    profile = RadialProfile(kind, 0.5, 1.0, grid, np.zeros_like(grid), np.exp(-2.0 * grid))
    fit = decay_rate(profile)
    assert fit.kappa == pytest.approx(2.0, abs=1e-6)
    assert fit.residual <= 1e-9


def test_ground_state_tail_rate(profile_09):
    assert 0.39 <= profile_09.decay <= 0.48


def test_line_profile_tail_rate(line_profile_05):
    assert 0.82 <= decay_rate(line_profile_05).kappa <= 0.91


@pytest.mark.slow
def test_central_amplitude_decreases_towards_mass(soler):
    centers = [solve_soler_radial(omega, 1.0, soler).v[0] for omega in (0.90, 0.95, 0.99)]
    assert centers[0] > centers[1] > centers[2] > 0
