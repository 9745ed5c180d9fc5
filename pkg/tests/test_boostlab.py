import numpy as np
import pytest

import boostlab
from ansatz import build_family, build_line_field, sample_points
from boostlab import (
    angular_check_moving, boosted_observables, current_check, derivative_check, moving_wave, observation_box,
    pde_residual, relation_check, relative_gamma_error, track_peak,
)
from clifford import boost_frame
from errors import QuadratureError
from quadrature import QuadratureSpec


@pytest.fixture(scope="module")
def family_field(profile_09):
    return build_family(profile_09, 1)


@pytest.fixture(scope="module")
def line_field(line_profile_05):
    return build_line_field(line_profile_05)


def test_frame_and_field_dimensions_must_match(family_field, line_field):
    with pytest.raises(ValueError):
        moving_wave(family_field, boost_frame(0.5))
    with pytest.raises(ValueError):
        moving_wave(line_field, boost_frame([0.0, 0.0, 0.5]))


def test_rest_wave_is_the_standing_wave(family_field):
    wave = moving_wave(family_field, boost_frame([0.0, 0.0, 0.0]))
    points = sample_points(family_field, count=6)
    expected = np.exp(-1j * 0.9 * 0.7) * family_field.evaluate(points)
    np.testing.assert_allclose(wave.evaluate(0.7, points), expected, rtol=1e-13)


@pytest.mark.parametrize("v", [[0.0, 0.0, 0.5], [0.3, 0.4, 0.0], [0.0, 0.0, 0.9]])
def test_moving_wave_solves_the_equation(family_field, v):
    wave = moving_wave(family_field, boost_frame(v))
    points = sample_points(family_field, count=16) + wave.velocity * 0.7
    assert pde_residual(wave, 0.7, points) <= 1e-6
    assert pde_residual(wave, 0.7, points, method="fd") <= 1e-6
    assert derivative_check(wave, 0.7, points) <= 1e-6


def test_pde_residual_detects_scaled_component(profile_09):
    wave = moving_wave(build_family(profile_09.scaled(u=1.05), 1), boost_frame([0.0, 0.0, 0.5]))
    points = sample_points(wave.base, count=16)
    assert pde_residual(wave, 0.0, points) >= 1e-3


def test_pde_residual_rejects_unknown_method(family_field):
    wave = moving_wave(family_field, boost_frame([0.0, 0.0, 0.5]))
    with pytest.raises(ValueError):
        pde_residual(wave, 0.0, sample_points(family_field, count=2), method="spectral")


@pytest.mark.parametrize("v", [[0.0, 0.0, 0.6], [0.3, 0.4, 0.0]])
def test_current_transforms_as_four_vector(family_field, v):
    wave = moving_wave(family_field, boost_frame(v))
    assert current_check(wave, 1.3, sample_points(family_field)) <= 1e-12


def test_angular_momentum_along_boost_axis(family_field):
    wave = moving_wave(family_field, boost_frame([0.0, 0.0, 0.6]))
    points = sample_points(family_field) + wave.velocity * 0.5
    assert angular_check_moving(wave, 0.5, points) <= 1e-8
    with pytest.raises(ValueError):
        angular_check_moving(moving_wave(family_field, boost_frame([0.6, 0.0, 0.0])), 0.5, points)


def test_peak_moves_with_velocity(family_field):
    wave = moving_wave(family_field, boost_frame([0.0, 0.0, 0.5]))
    assert track_peak(wave, 2.0) == pytest.approx(1.0, abs=0.02)


def test_observation_box_is_centered_and_contracted(family_field):
    frame = boost_frame([0.0, 0.0, 0.8])
    box = observation_box(moving_wave(family_field, frame), 1.5, QuadratureSpec())
    np.testing.assert_allclose(box.center, [0.0, 0.0, 1.2])
    along, across = box.rules[0][0], box.rules[1][0]
    assert np.max(along) == pytest.approx(np.max(across) / frame.gamma)


def test_line_relations(line_field):
    report = relation_check(line_field, 0.5, [0.3, 0.6, 0.9], [0.0, 1.0], tolerance=1e-6)
    assert report.passed, report.failures()
    assert len(report.rows) == 6
    assert relative_gamma_error(report) <= 1e-6
    gammas = [row["gamma"] for row in report.rows if row["t"] == 0.0]
    energies = [row["E_v"] for row in report.rows if row["t"] == 0.0]
    assert energies == sorted(energies)
    assert gammas == sorted(gammas)


def test_line_relations_detect_scaled_profile(line_profile_05):
    field = build_line_field(line_profile_05.scaled(v=1.03))
    report = relation_check(field, 0.5, [0.6], [0.0], tolerance=1e-6)
    assert not report.passed


def test_unconverged_row_is_recorded_as_failed(line_field, monkeypatch):
    def unconverged(*args, **kwargs):
        raise QuadratureError("entry E", 1.0, 1.1)

    monkeypatch.setattr(boostlab, "gated_integrate", unconverged)
    report = relation_check(line_field, 0.5, [0.6], [0.0, 1.0])
    assert not report.passed
    assert report.values["E0"] > 0
    assert len(report.rows) == 2
    for row in report.rows:
        assert row["pass"] is False
        assert "did not converge" in row["error"]


def test_empty_velocity_list(line_field):
    report = relation_check(line_field, 0.5, [], [0.0, 1.0])
    assert report.rows == []
    assert report.passed


@pytest.mark.slow
def test_energy_momentum_relations_3d(family_field):
    velocities = [[0.0, 0.0, 0.2], [0.0, 0.0, 0.5], [0.0, 0.0, 0.8], [0.3, 0.4, 0.0]]
    report = relation_check(family_field, 0.9, velocities, [0.0, 1.0])
    assert report.passed, report.failures()
    for row in report.rows:
        assert row["energy_residual"] <= 1e-4
        assert row["momentum_residual"] <= 1e-4
        assert row["charge_residual"] <= 1e-4


@pytest.mark.slow
def test_energy_momentum_relations_minus_family(minus_profile_09):
    field = build_family(minus_profile_09, 2)
    report = relation_check(field, 0.9, [[0.0, 0.0, 0.5], [0.3, 0.4, 0.0]], [0.0, 1.0])
    assert report.passed, report.failures()
    assert len(report.rows) == 4


@pytest.mark.slow
def test_boosted_charge_is_invariant(family_field):
    wave = moving_wave(family_field, boost_frame([0.0, 0.0, 0.5]))
    moving = boosted_observables(wave, 1.0).values
    rest = boosted_observables(moving_wave(family_field, boost_frame([0.0, 0.0, 0.0])), 0.0).values
    assert moving["Q_v"] == pytest.approx(rest["Q_v"], rel=1e-4)
    assert moving["gamma"] == pytest.approx(1.0 / np.sqrt(0.75))
