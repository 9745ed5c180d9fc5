# config.py

import os
from typing import List, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, root_validator, validator

from errors import ConfigError

load_dotenv()


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


def _env_float(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")


LOG_LEVEL = os.environ.get("SOLITON_LOG_LEVEL", "INFO").upper()
if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
    raise ValueError(f"SOLITON_LOG_LEVEL not understood: {LOG_LEVEL}")

THREADS = _env_int("SOLITON_THREADS", 1)
OUTPUT_DIR = os.environ.get("SOLITON_OUTPUT_DIR", "runs")
GRID_POINTS = _env_int("SOLITON_GRID_POINTS", 4001)
RTOL = _env_float("SOLITON_RTOL", 1e-12)

if THREADS < 1:
    raise ValueError("SOLITON_THREADS must be at least 1.")
if GRID_POINTS < 201:
    raise ValueError("SOLITON_GRID_POINTS must be at least 201.")


class ModelSection(BaseModel):
    equation: str = "dirac3d"
    omega: float = 0.9
    mass: float = 1.0
    meson_mass: float = 1.0
    eta: float = 0.0
    nonlinearity: str = "soler_linear"
    coupling: float = 1.0
    exponent: float = 1.0
    family: int = 1
    nodes: int = 0

    class Config:
        extra = "forbid"

    @validator("equation")
    def _equation(cls, value):
        if value not in ("dirac3d", "dirac1d", "kgd"):
            raise ValueError("equation must be one of dirac3d, dirac1d, kgd")
        return value

    @validator("nonlinearity")
    def _nonlinearity(cls, value):
        if value not in ("soler_linear", "power", "none"):
            raise ValueError("nonlinearity must be one of soler_linear, power, none")
        return value

    @validator("mass")
    def _mass(cls, value):
        if value <= 0:
            raise ValueError("mass must be positive")
        return value

    @validator("meson_mass")
    def _meson(cls, value):
        if value < 0:
            raise ValueError("meson_mass must be non-negative")
        return value

    @validator("coupling")
    def _coupling(cls, value):
        if value <= 0:
            raise ValueError("coupling lambda must be positive")
        return value

    @validator("exponent")
    def _exponent(cls, value):
        if value < 1:
            raise ValueError("exponent p must be >= 1")
        return value

    @validator("family")
    def _family(cls, value):
        if value not in (1, 2, 3, 4):
            raise ValueError("family must be 1, 2, 3 or 4")
        return value

    @validator("nodes")
    def _nodes(cls, value):
        if value < 0:
            raise ValueError("nodes must be non-negative")
        return value

    @root_validator(skip_on_failure=True)
    def _frequency(cls, values):
        omega, mass = values.get("omega"), values.get("mass")
        if not 0 < omega < mass:
            raise ValueError(f"omega must satisfy 0 < omega < mass (got omega={omega}, mass={mass})")
        return values


class NumericsSection(BaseModel):
    r_max: Optional[float] = None
    grid_points: int = GRID_POINTS
    rtol: float = RTOL
    residual_tol: float = 1e-8
    quad_order: int = 8
    quad_breaks: Tuple[float, ...] = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0)
    quad_tol: float = 1e-6
    quad_gate: bool = True
    scf_relax: float = 0.5
    scf_tol: float = 1e-9
    scf_max_iter: int = 200

    class Config:
        extra = "forbid"

    @validator("r_max")
    def _r_max(cls, value):
        if value is not None and value <= 0:
            raise ValueError("r_max must be positive")
        return value

    @validator("grid_points")
    def _grid(cls, value):
        if value < 201:
            raise ValueError("grid_points must be at least 201")
        return value

    @validator("scf_relax")
    def _relax(cls, value):
        if not 0 < value <= 1:
            raise ValueError("scf_relax must be in (0, 1]")
        return value


class ExperimentSection(BaseModel):
    velocities: List[Tuple[float, float, float]] = Field(default_factory=list)
    t_samples: List[float] = Field(default_factory=lambda: [0.0, 1.0])
    checks: List[str] = Field(default_factory=lambda: ["virial", "symmetry"])
    tolerance: float = 1e-4

    class Config:
        extra = "forbid"

    @validator("velocities", each_item=True)
    def _subluminal(cls, value):
        if sum(c * c for c in value) >= 1.0:
            raise ValueError(f"velocity {value} is not below the speed of light")
        return value

    @validator("checks", each_item=True)
    def _checks(cls, value):
        if value not in ("virial", "symmetry", "angular", "functionals", "convergence"):
            raise ValueError(f"unknown check {value!r}")
        return value


class OutputSection(BaseModel):
    directory: str = OUTPUT_DIR
    format: str = "text"

    class Config:
        extra = "forbid"

    @validator("format")
    def _format(cls, value):
        if value not in ("text", "structured"):
            raise ValueError("format must be text or structured")
        return value


class RunConfig(BaseModel):
    model: ModelSection = Field(default_factory=ModelSection)
    numerics: NumericsSection = Field(default_factory=NumericsSection)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    output: OutputSection = Field(default_factory=OutputSection)
    threads: int = THREADS

    class Config:
        extra = "forbid"


def load_config(path=None, overrides=None):
    """
    Resolve a RunConfig from an optional YAML file and CLI overrides.

    Overrides are a flat mapping of dotted keys ("output.directory") to values;
    None values are ignored so unset flags keep the file value.
    """
    data = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = yaml.safe_load(handle) or {}
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}")
        except yaml.YAMLError as e:
            raise ConfigError(f"config {path} is not valid YAML: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a mapping at the top level")

    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        node = data
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = node.setdefault(key, {})
        node[leaf] = value

    try:
        return RunConfig.parse_obj(data)
    except ValidationError as e:
        raise ConfigError(str(e))
