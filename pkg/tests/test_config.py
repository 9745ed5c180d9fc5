import pytest

from config import RunConfig, load_config
from errors import ConfigError


def _write(tmp_path, text):
    path = tmp_path / "run.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults():
    config = load_config()
    assert isinstance(config, RunConfig)
    assert config.model.equation == "dirac3d"
    assert config.model.omega == 0.9
    assert config.numerics.quad_order == 8
    assert config.numerics.quad_breaks[-1] == 12.0
    assert config.numerics.quad_gate is True
    assert config.experiment.t_samples == [0.0, 1.0]
    assert config.output.format == "text"


def test_yaml_values_are_loaded(tmp_path):
    path = _write(tmp_path, """
model:
  equation: kgd
  omega: 0.8
  eta: 0.5
  nonlinearity: none
experiment:
  velocities: [[0.0, 0.0, 0.5]]
  checks: [virial, convergence]
""")
    config = load_config(path)
    assert config.model.equation == "kgd"
    assert config.model.eta == 0.5
    assert config.experiment.velocities == [(0.0, 0.0, 0.5)]
    assert config.experiment.checks == ["virial", "convergence"]


def test_overrides_take_precedence(tmp_path):
    path = _write(tmp_path, "output:\n  directory: from_file\n")
    config = load_config(path, {"output.directory": "from_flag", "output.format": None, "model.omega": 0.7})
    assert config.output.directory == "from_flag"
    assert config.output.format == "text"
    assert config.model.omega == 0.7


def test_empty_file_gives_defaults(tmp_path):
    assert load_config(_write(tmp_path, "")).model.mass == 1.0


@pytest.mark.parametrize("text", [
    "model:\n  colour: red\n",
    "model:\n  omega: 1.0\n",
    "model:\n  omega: 1.5\n  mass: 1.0\n",
    "model:\n  family: 5\n",
    "model:\n  nonlinearity: cubic\n",
    "numerics:\n  scf_relax: 0.0\n",
    "numerics:\n  grid_points: 50\n",
    "experiment:\n  velocities: [[0.0, 0.8, 0.6]]\n",
    "experiment:\n  checks: [everything]\n",
    "output:\n  format: xml\n",
    "- just\n- a list\n",
    "model: [unclosed\n",
])
def test_invalid_configs_raise_config_error(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, text))


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.yaml")
