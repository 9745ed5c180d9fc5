import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf

from ansatz import build_family, build_line_field, sample_points
from clifford import boost_frame
from coupled import exponential_moments, md_boost_residuals, md_functionals, md_potentials, yukawa_radial
from errors import ToleranceError
from functionals import reduced_integrals

GRID = np.linspace(0.0, 8.0, 1601)


def _gaussian(r):
    return np.exp(-r * r)


def _yukawa_quadrature(r, mass):
    def kernel(s):
        return s * math.exp(-s * s) * (math.exp(-mass * abs(r - s)) - math.exp(-mass * (r + s)))

    value, _ = quad(kernel, 0.0, 12.0, points=[r], epsabs=1e-14, epsrel=1e-13)
    return value / (2.0 * mass * r)


def test_coulomb_potential_of_gaussian():
    field = yukawa_radial(_gaussian, 0.0, GRID, convention="gaussian")
    r = GRID[1::100]
    expected = math.pi ** 1.5 * erf(r) / r
    np.testing.assert_allclose(field.values[1::100], expected, rtol=1e-10)
    assert field.values[0] == pytest.approx(2.0 * math.pi, rel=1e-10)


@pytest.mark.parametrize("mass", [0.5, 1.0, 2.0])
def test_yukawa_potential_of_gaussian(mass):
    field = yukawa_radial(_gaussian, mass, GRID)
    for r in (0.25, 1.0, 2.5, 5.0):
        assert field.value(r) == pytest.approx(_yukawa_quadrature(r, mass), rel=1e-8)
    assert field.operator_residual() <= 1e-6


def test_yukawa_exterior_continues_smoothly():
    field = yukawa_radial(_gaussian, 1.0, GRID)
    assert field.value(GRID[-1] + 1.0) == pytest.approx(field.charge * math.exp(-9.0) / 9.0, rel=1e-12)
    assert field.slope(GRID[-1] + 1e-12) == pytest.approx(field.slope(GRID[-1]), rel=1e-6)


def test_tabulated_source_matches_callable():
    tabulated = yukawa_radial(_gaussian(GRID), 1.0, GRID)
    exact = yukawa_radial(_gaussian, 1.0, GRID)
    np.testing.assert_allclose(tabulated.values, exact.values, rtol=1e-7)


def test_yukawa_rejects_bad_input():
    with pytest.raises(ToleranceError):
        yukawa_radial(lambda r: 1.0 / (1.0 + r), 1.0, GRID)
    with pytest.raises(ValueError):
        yukawa_radial(_gaussian, -1.0, GRID)
    with pytest.raises(ValueError):
        yukawa_radial(_gaussian, 1.0, GRID, convention="gaussian")
    with pytest.raises(ValueError):
        yukawa_radial(_gaussian, 1.0, GRID, convention="heaviside")
    with pytest.raises(ValueError):
        yukawa_radial(np.ones(5), 1.0, GRID)


def test_exponential_moments_of_constant():
    mass = 1.5
    a, b = exponential_moments(lambda r: np.ones_like(r), GRID, mass, power=0)
    np.testing.assert_allclose(a, (1.0 - np.exp(-mass * GRID)) / mass, atol=1e-13)
    np.testing.assert_allclose(b, (1.0 - np.exp(-mass * (GRID[-1] - GRID))) / mass, atol=1e-13)


@pytest.fixture(scope="module")
def md(profile_09):
    return md_potentials(build_family(profile_09, 1))


@pytest.mark.slow
def test_md_potentials(md, profile_09):
    q = reduced_integrals(profile_09)["rho"]
    assert md.scalar.monopole_charge == pytest.approx(q, rel=1e-8)
    r = np.array([profile_09.r_max + 2.0])
    assert md.scalar.radial(0, r)[0] == pytest.approx(md.scalar.monopole_charge / r[0], rel=1e-12)
    assert md.vector.b(r)[0] == pytest.approx(md.vector.dipole / r[0] ** 3, rel=1e-10)


@pytest.mark.slow
def test_md_functionals_pass(md):
    report = md_functionals(md.field, md)
    assert report.passed, report.failures()
    assert report.check("gauge").residual <= 1e-6
    assert report.values["T"] > 0


def test_md_potentials_need_family_field(line_profile_05):
    with pytest.raises(ValueError):
        md_potentials(build_line_field(line_profile_05))


@pytest.mark.slow
@pytest.mark.parametrize("v", [[0.0, 0.0, 0.5], [0.3, 0.4, 0.0]])
def test_md_boosted_fields(md, v):
    frame = boost_frame(v)
    points = sample_points(md.field, count=8) + frame.v * 0.4
    report = md_boost_residuals(md, frame, 0.4, points)
    assert report.passed, report.failures()


def test_heavy_meson_screens_to_local_source():
    mass = 50.0
    field = yukawa_radial(_gaussian, mass, GRID)
    r = GRID[20:400:50]
    np.testing.assert_allclose(field.value(r), _gaussian(r) / mass ** 2, rtol=1e-2)
    assert field.operator_residual() <= 1e-6
