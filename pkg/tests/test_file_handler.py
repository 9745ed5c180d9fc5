import numpy as np
import pandas as pd
import pytest

from ansatz import build_line_field, sample_points
from errors import ProfileFormatError
from file_handler import dump_field, read_profile, validate_file, write_profile, write_table

ROWS = "0 0 1\n0.5 0.1 0.8\n1 0.05 0.4\n1.5 0.01 0.1\n"


def _profile_file(tmp_path, header, rows=ROWS, name="profile.dat"):
    path = tmp_path / name
    path.write_text(f"# {header}\n{rows}", encoding="utf-8")
    return path


def test_validate_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        validate_file(tmp_path / "missing.dat")
    other = tmp_path / "profile.csv"
    other.write_text("", encoding="utf-8")
    with pytest.raises(ValueError):
        validate_file(other)
    validate_file(other, allowed=[".csv"])


def test_profile_round_trip_is_exact(tmp_path, line_profile_05):
    path = write_profile(line_profile_05, tmp_path / "out" / "profile.dat")
    restored = read_profile(path)
    assert restored.kind == "dirac1d"
    assert restored.omega == line_profile_05.omega
    assert restored.mass == line_profile_05.mass
    assert restored.residual == line_profile_05.residual
    assert restored.model.kind == line_profile_05.model.kind
    np.testing.assert_array_equal(restored.grid, line_profile_05.grid)
    np.testing.assert_array_equal(restored.u, line_profile_05.u)
    np.testing.assert_array_equal(restored.v, line_profile_05.v)


def test_header_line_format(tmp_path, line_profile_05):
    path = write_profile(line_profile_05, tmp_path / "profile.dat")
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first.startswith("# kind=dirac1d omega=0.5 mass=1 ")


def test_minimal_header_defaults(tmp_path):
    profile = read_profile(_profile_file(tmp_path, "kind=dirac3d_plus omega=0.9 mass=1"))
    assert profile.model.kind == "soler_linear"
    assert profile.nodes == 0
    assert profile.residual is None
    assert profile.chi is None


@pytest.mark.parametrize("header,rows", [
    ("kind=dirac3d_plus omega", ROWS),
    ("kind=dirac3d_plus omega=abc mass=1", ROWS),
    ("kind=dirac3d_plus mass=1", ROWS),
    ("kind=dirac3d_plus omega=0.9 mass=1", "0 0 1 2\n0.5 0.1 0.8 2\n"),
    ("kind=kgd3d omega=0.9 mass=1", ROWS),
    ("kind=dirac3d_plus omega=0.9 mass=1", "0 0 one\n"),
    ("kind=dirac3d_plus omega=1.2 mass=1", ROWS),
    ("kind=dirac2d omega=0.9 mass=1", ROWS),
])
def test_malformed_profiles(tmp_path, header, rows):
    with pytest.raises(ProfileFormatError):
        read_profile(_profile_file(tmp_path, header, rows))


def test_kgd_meta_is_restored(tmp_path):
    rows = "0 0 1 0.3\n0.5 0.1 0.8 0.2\n1 0.05 0.4 0.1\n1.5 0.01 0.1 0.05\n"
    header = "kind=kgd3d omega=0.8 mass=1 nonlinearity=none lambda=0 exponent=1 eta=0.5 meson_mass=1"
    profile = read_profile(_profile_file(tmp_path, header, rows))
    assert profile.meta == {"eta": 0.5, "meson_mass": 1.0}
    assert profile.model.is_zero
    np.testing.assert_array_equal(profile.chi, [0.3, 0.2, 0.1, 0.05])


def test_empty_table_keeps_header(tmp_path):
    path = write_table([], tmp_path / "boost.csv", columns=["v1", "t", "E_v"])
    assert open(path, encoding="utf-8").read().strip() == "v1,t,E_v"


def test_dump_field(tmp_path, line_profile_05):
    field = build_line_field(line_profile_05)
    path = dump_field(field, sample_points(field, count=4), tmp_path / "field.csv")
    table = pd.read_csv(path)
    assert list(table.columns) == ["x1", "Re_psi1", "Im_psi1", "Re_psi2", "Im_psi2"]
    assert len(table) == 4
