import numpy as np
import pytest

import kgd
from ansatz import sample_points
from clifford import boost_frame
from errors import QuadratureError, ScfDivergenceError
from kgd import (
    BURN_IN, jacobi_sweep, kgd_functionals, kgd_relation_check, kgd_scf_solve, kgd_virial, klein_gordon_residual,
    state_from_profile,
)
from profiles import NonlinearityModel, ode_residual

pytestmark = pytest.mark.slow


def test_scf_converges_with_certified_residuals(kgd_state):
    assert kgd_state.profile.kind == "kgd3d"
    assert kgd_state.scf_residual <= 1e-9
    assert kgd_state.dirac_residual <= 1e-8
    assert kgd_state.kg_residual <= 1e-8
    assert kgd_state.profile.nodes == 0
    assert kgd_state.profile.v[0] > 0
    assert kgd_state.chi[0] > 0


def test_scf_history_decreases_after_burn_in(kgd_state):
    history = kgd_state.history
    assert history[-1] <= 1e-9
    assert all(later <= earlier for earlier, later in zip(history[BURN_IN:], history[BURN_IN + 1:]))


def test_meson_integrals(kgd_state):
    report = kgd_functionals(kgd_state)
    assert report.passed, report.failures()
    assert report.values["R1"] == pytest.approx(report.values["R1_dual"], rel=1e-6)
    assert report.values["R"] > 0
    assert report.values["sum_P"] > 0


def test_meson_gradient_components_are_isotropic(kgd_state):
    values = kgd_functionals(kgd_state).values
    for j in (1, 2, 3):
        assert values[f"P{j}"] == pytest.approx(values["sum_P"] / 3.0, rel=1e-6)
        assert values[f"I{j}"] == pytest.approx(values["sum_I"] / 3.0, rel=1e-6)


def test_kgd_virial_identities(kgd_state):
    report = kgd_virial(kgd_state)
    assert report.passed, report.failures()
    for key in ("kgd_virial_a", "kgd_virial_c", "kgd_virial_d", "kgd_virial_e"):
        assert report.check(key).residual <= 1e-5
    assert report.values["E0"] > 0


def test_kgd_virial_detects_scaled_component(kgd_state):
    report = kgd_virial(kgd_state.scaled(u=1.05))
    assert not report.passed
    assert report.check("kgd_virial_a").residual >= 1e-3


def test_jacobi_sweep_is_stationary(kgd_state):
    assert jacobi_sweep(kgd_state) <= 1e-6 * np.max(np.abs(kgd_state.chi))


def test_state_survives_profile_round_trip(kgd_state):
    restored = state_from_profile(kgd_state.profile)
    assert restored.eta == kgd_state.eta
    assert restored.meson_mass == kgd_state.meson_mass
    np.testing.assert_array_equal(restored.chi, kgd_state.chi)
    assert restored.dirac_residual == pytest.approx(ode_residual(kgd_state.profile))


def test_klein_gordon_residual_at_rest(kgd_state):
    points = sample_points(kgd_state.spinor_field(), count=8)
    assert klein_gordon_residual(kgd_state, boost_frame([0.0, 0.0, 0.0]), 0.0, points) <= 1e-5


@pytest.mark.parametrize("velocity", [[0.0, 0.0, 0.5], [0.3, 0.4, 0.0]])
def test_kgd_relations_for_moving_pair(kgd_state, velocity):
    report = kgd_relation_check(kgd_state, [velocity], [0.0, 1.0])
    assert report.passed, report.failures()
    assert len(report.rows) == 2
    for row in report.rows:
        assert row["energy_residual"] <= 1e-4
        assert row["momentum_residual"] <= 1e-4
        assert row["charge_residual"] <= 1e-4
        assert row["klein_gordon_residual"] <= 1e-4
    assert report.check(f"conservation_E_v[v={np.round(velocity, 6).tolist()}]").passed


def test_unconverged_kgd_row_is_recorded_as_failed(kgd_state, monkeypatch):
    gated = kgd.gated_integrate

    def boosted_rows_fail(integrand, make_grid, spec, scale_keys=None):
        if scale_keys == ["E", "Q"]:
            raise QuadratureError("entry E", 1.0, 1.1)
        return gated(integrand, make_grid, spec, scale_keys=scale_keys)

    monkeypatch.setattr(kgd, "gated_integrate", boosted_rows_fail)
    report = kgd_relation_check(kgd_state, [[0.0, 0.0, 0.5], [0.3, 0.4, 0.0]], [0.0])
    assert not report.passed
    assert len(report.rows) == 2
    assert all(row["pass"] is False for row in report.rows)


def test_decoupled_limit_is_soler_state(profile_09, soler):
    state = kgd_scf_solve(0.9, 1.0, 1.0, 0.0, soler)
    assert state.profile.kind == "kgd3d"
    np.testing.assert_array_equal(state.profile.v, profile_09.v)
    np.testing.assert_array_equal(state.profile.u, profile_09.u)
    assert not np.any(state.chi)


@pytest.mark.parametrize("kwargs", [
    {"omega": 1.0, "meson_mass": 1.0, "eta": 0.5},
    {"omega": 0.8, "meson_mass": 0.0, "eta": 0.5},
    {"omega": 0.8, "meson_mass": 1.0, "eta": 0.5, "relax": 0.0},
    {"omega": 0.8, "meson_mass": 1.0, "eta": 0.0},
])
def test_invalid_kgd_requests(kwargs):
    args = {"mass": 1.0, "model": NonlinearityModel.zero(), **kwargs}
    with pytest.raises(ValueError):
        kgd_scf_solve(**args)


def test_iteration_cap_raises_divergence():
    with pytest.raises(ScfDivergenceError) as info:
        kgd_scf_solve(0.8, 1.0, 1.0, 0.5, NonlinearityModel.zero(), max_iter=2)
    assert len(info.value.history) == 2
