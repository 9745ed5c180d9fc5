import json

import pandas as pd
import pytest
from typer.testing import CliRunner

import boostlab
from errors import QuadratureError
from file_handler import read_profile, write_profile
from main import BOOST_COLUMNS, EXIT_CONFIG, EXIT_IDENTITY, EXIT_PASS, app

runner = CliRunner()

LINE_CONFIG = """
model:
  equation: dirac1d
  omega: 0.5
experiment:
  velocities: []
"""


def _config(tmp_path, text=LINE_CONFIG):
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    return str(path)


def _invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


@pytest.fixture
def line_file(tmp_path, line_profile_05):
    return str(write_profile(line_profile_05, tmp_path / "line.dat"))


def test_solve_line_state(tmp_path):
    out = tmp_path / "out"
    result = _invoke("solve", "--config", _config(tmp_path), "--out", out)
    assert result.exit_code == EXIT_PASS
    profile = read_profile(str(out / "profile.dat"))
    assert profile.kind == "dirac1d"
    assert profile.residual <= 1e-10
    assert "pass=True" in (out / "solve.txt").read_text(encoding="utf-8")


def test_solve_rejects_frequency_above_mass(tmp_path):
    config = _config(tmp_path, "model:\n  omega: 1.2\n")
    result = _invoke("solve", "--config", config, "--out", tmp_path / "out")
    assert result.exit_code == EXIT_CONFIG
    assert not (tmp_path / "out" / "profile.dat").exists()


def test_verify_line_profile(tmp_path, line_file):
    out = tmp_path / "out"
    result = _invoke("verify", line_file, "--config", _config(tmp_path), "--out", out, "--format", "structured")
    assert result.exit_code == EXIT_PASS
    payload = json.loads((out / "verify.json").read_text(encoding="utf-8"))
    assert [item["name"] for item in payload] == ["certification", "dirac_functionals_1d"]
    assert all(item["pass"] for item in payload)


def test_verify_edited_profile_fails(tmp_path, line_profile_05):
    edited = str(write_profile(line_profile_05.scaled(v=1.03), tmp_path / "edited.dat"))
    result = _invoke("verify", edited, "--config", _config(tmp_path), "--out", tmp_path / "out")
    assert result.exit_code == EXIT_IDENTITY
    assert "failed=" in (tmp_path / "out" / "verify.txt").read_text(encoding="utf-8")


def test_verify_kind_mismatch(tmp_path, line_file):
    result = _invoke("verify", line_file, "--out", tmp_path / "out")
    assert result.exit_code == EXIT_CONFIG


def test_verify_missing_profile(tmp_path):
    result = _invoke("verify", tmp_path / "absent.dat", "--config", _config(tmp_path), "--out", tmp_path / "out")
    assert result.exit_code == EXIT_CONFIG


def test_boost_without_velocities(tmp_path, line_file):
    out = tmp_path / "out"
    result = _invoke("boost", line_file, "--config", _config(tmp_path), "--out", out)
    assert result.exit_code == EXIT_PASS
    table = pd.read_csv(out / "boost.csv")
    assert list(table.columns) == BOOST_COLUMNS
    assert table.empty


def test_boost_line_rows(tmp_path, line_file):
    config = _config(tmp_path, LINE_CONFIG.replace("velocities: []", "velocities: [[0.6, 0.0, 0.0]]"))
    out = tmp_path / "out"
    result = _invoke("boost", line_file, "--config", config, "--out", out)
    assert result.exit_code == EXIT_PASS
    table = pd.read_csv(out / "boost.csv")
    assert len(table) == 2
    assert table["gamma"].iloc[0] == pytest.approx(1.25)
    assert table["pass"].all()


def test_boost_records_unconverged_rows(tmp_path, line_file, monkeypatch):
    def unconverged(*args, **kwargs):
        raise QuadratureError("entry E", 1.0, 1.1)

    monkeypatch.setattr(boostlab, "gated_integrate", unconverged)
    config = _config(tmp_path, LINE_CONFIG.replace("velocities: []", "velocities: [[0.6, 0.0, 0.0]]"))
    out = tmp_path / "out"
    result = _invoke("boost", line_file, "--config", config, "--out", out)
    assert result.exit_code == EXIT_IDENTITY
    table = pd.read_csv(out / "boost.csv")
    assert len(table) == 2
    assert not table["pass"].any()
    assert table["error"].str.contains("did not converge").all()


def test_verify_malformed_profile(tmp_path):
    broken = tmp_path / "broken.dat"
    broken.write_text("# kind=dirac1d omega=abc mass=1\n0 0 1\n", encoding="utf-8")
    result = _invoke("verify", broken, "--config", _config(tmp_path), "--out", tmp_path / "out")
    assert result.exit_code == EXIT_CONFIG
    assert "ProfileFormatError" in result.stdout


@pytest.mark.slow
def test_verify_soler_profile(tmp_path, profile_09):
    path = str(write_profile(profile_09, tmp_path / "soler.dat"))
    config = _config(tmp_path, "experiment:\n  checks: [virial, angular]\n")
    out = tmp_path / "out"
    result = _invoke("verify", path, "--config", config, "--out", out)
    assert result.exit_code == EXIT_PASS
    samples = pd.read_csv(out / "field_samples.csv")
    assert list(samples.columns[:3]) == ["x1", "x2", "x3"]


@pytest.mark.slow
def test_md_report_writes_potentials(tmp_path, profile_09):
    path = str(write_profile(profile_09, tmp_path / "soler.dat"))
    config = _config(tmp_path, "experiment:\n  velocities: [[0.0, 0.0, 0.5]]\n  t_samples: [0.0]\n")
    out = tmp_path / "out"
    result = _invoke("md-report", path, "--config", config, "--out", out, "--format", "structured")
    assert result.exit_code == EXIT_PASS
    payload = json.loads((out / "md_report.json").read_text(encoding="utf-8"))
    names = {entry["name"] for entry in payload[0]["entries"]}
    assert {"T", "gauge", "reciprocity", "v0_t0.0_electric_field"} <= names
    table = pd.read_csv(out / "potentials.csv")
    assert set(table["kind"]) == {"Phi", "A"}


def test_md_report_needs_three_dimensional_profile(tmp_path, line_file):
    result = _invoke("md-report", line_file, "--config", _config(tmp_path), "--out", tmp_path / "out")
    assert result.exit_code == EXIT_CONFIG


@pytest.mark.slow
def test_kgd_solve_reports_virial(tmp_path):
    config = _config(tmp_path, "model:\n  omega: 0.8\n  eta: 0.5\n  nonlinearity: none\n")
    out = tmp_path / "out"
    result = _invoke("kgd-solve", "--config", config, "--out", out, "--format", "structured")
    assert result.exit_code == EXIT_PASS
    payload = json.loads((out / "kgd_solve.json").read_text(encoding="utf-8"))
    assert [item["name"] for item in payload] == ["solve", "kgd_virial"]
    assert payload[0]["rows"][-1]["sup_change"] <= 1e-9
    assert read_profile(str(out / "profile.dat")).kind == "kgd3d"
