# conftest.py

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from kgd import kgd_scf_solve  # noqa: E402
from profiles import NonlinearityModel, solve_gross_neveu_1d, solve_soler_radial  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: direct 3D quadrature or SCF runs taking longer than a few seconds")


@pytest.fixture(scope="session")
def soler():
    return NonlinearityModel.soler(1.0)


@pytest.fixture(scope="session")
def profile_09(soler):
    return solve_soler_radial(0.9, 1.0, soler)


@pytest.fixture(scope="session")
def profile_07(soler):
    return solve_soler_radial(0.7, 1.0, soler)


@pytest.fixture(scope="session")
def minus_profile_09(soler):
    return solve_soler_radial(0.9, 1.0, soler, sign=-1)


@pytest.fixture(scope="session")
def line_profile_05(soler):
    return solve_gross_neveu_1d(0.5, 1.0, soler)


@pytest.fixture(scope="session")
def kgd_state():
    return kgd_scf_solve(0.8, 1.0, 1.0, 0.5, NonlinearityModel.zero())
