# main.py

import json
import logging
import os
import sys
from typing import List, Optional, Tuple

import numpy as np
import typer

from ansatz import angular_checks, build_family, build_line_field, sample_points, symmetry_integrals
from boostlab import relation_check
from clifford import boost_frame
from config import LOG_LEVEL, RunConfig, load_config
from coupled import md_boost_residuals, md_functionals, md_potentials
from errors import ConfigError, ProfileFormatError, SolitonLabError
from file_handler import dump_field, read_profile, write_potential_table, write_profile, write_report, write_table
from formatter import error_object, render
from functionals import convergence_check, dirac_functionals, dirac_functionals_1d, virial_suite
from kgd import KgdState, kgd_functionals, kgd_relation_check, kgd_scf_solve, kgd_virial, state_from_profile
from profiles import NonlinearityModel, RadialProfile, ode_residual, solve_gross_neveu_1d, solve_soler_radial
from quadrature import QuadratureSpec
from reports import FunctionalReport

EXIT_PASS = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IDENTITY = 4

PROFILE_KINDS = {
    "dirac3d": ("dirac3d_plus", "dirac3d_minus"),
    "dirac1d": ("dirac1d",),
    "kgd": ("kgd3d",),
}

app = typer.Typer(add_completion=False, help="Solitary-wave laboratory: solve, verify and boost stationary states.")


def build_model(config: RunConfig) -> NonlinearityModel:
    section = config.model
    if section.nonlinearity == "none":
        return NonlinearityModel.zero()
    if section.nonlinearity == "power":
        return NonlinearityModel.power(section.coupling, section.exponent)
    return NonlinearityModel.soler(section.coupling)


def build_spec(config: RunConfig) -> QuadratureSpec:
    numerics = config.numerics
    return QuadratureSpec(breaks=tuple(numerics.quad_breaks), order=numerics.quad_order, tol=numerics.quad_tol,
                          gate=numerics.quad_gate, threads=config.threads)


def _family_sign(family):
    return 1 if family in (1, 3) else -1


def _certification(profile: RadialProfile, tolerance) -> FunctionalReport:
    report = FunctionalReport("certification", context={"kind": profile.kind, "omega": profile.omega})
    residual = ode_residual(profile)
    report.values.update({"ode_residual": residual, "decay": profile.decay, "nodes": profile.nodes})
    report.add("ode_residual", "profile satisfies its radial system", residual, 0.0, tolerance, residual=residual)
    return report


def solve_pipeline(config: RunConfig) -> Tuple[RadialProfile, List[FunctionalReport], Optional[KgdState]]:
    """
    Solve the configured equation; the report carries residual, decay, nodes and
    the SCF history. The KGD state is returned alongside its profile.
    """
    section, numerics = config.model, config.numerics
    model = build_model(config)
    logging.info(f"Solving {section.equation} at omega={section.omega}, mass={section.mass}")
    report = FunctionalReport("solve", context={"equation": section.equation, **model.describe()})
    state = None

    if section.equation == "kgd":
        state = kgd_scf_solve(
            section.omega, section.mass, section.meson_mass, section.eta, model, numerics.scf_relax,
            r_max=numerics.r_max, grid_points=numerics.grid_points, rtol=numerics.rtol, tol=numerics.scf_tol,
            max_iter=numerics.scf_max_iter, residual_tol=numerics.residual_tol,
        )
        profile = state.profile
        report.values.update(state.summary())
        report.rows.extend({"iteration": k, "sup_change": value} for k, value in enumerate(state.history))
        report.add("scf_residual", "sup |chi_new - chi_old| <= tol", state.scf_residual, 0.0, numerics.scf_tol,
                   residual=state.scf_residual)
    elif section.equation == "dirac1d":
        profile = solve_gross_neveu_1d(section.omega, section.mass, model, x_max=numerics.r_max,
                                       grid_points=numerics.grid_points, rtol=numerics.rtol,
                                       residual_tol=min(numerics.residual_tol, 1e-10))
    else:
        profile = solve_soler_radial(section.omega, section.mass, model, _family_sign(section.family), section.nodes,
                                     r_max=numerics.r_max, grid_points=numerics.grid_points, rtol=numerics.rtol,
                                     residual_tol=numerics.residual_tol)

    report.values.update({"kind": profile.kind, "residual": profile.residual, "decay": profile.decay,
                          "nodes": profile.nodes, "r_max": profile.r_max, "grid_points": len(profile.grid)})
    report.merge(_certification(profile, numerics.residual_tol))
    return profile, [report], state


def _check_kind(config: RunConfig, profile: RadialProfile):
    allowed = PROFILE_KINDS[config.model.equation]
    if profile.kind not in allowed:
        raise ConfigError(f"profile kind {profile.kind} does not match equation {config.model.equation}")


def verify_pipeline(config: RunConfig, profile: RadialProfile) -> List[FunctionalReport]:
    """Identity reports for a stored profile: certification plus the checks listed in the experiment section."""
    _check_kind(config, profile)
    spec = build_spec(config)
    checks = config.experiment.checks
    reports = [_certification(profile, config.numerics.residual_tol)]

    if profile.kind == "dirac1d":
        reports.append(dirac_functionals_1d(build_line_field(profile), profile.omega, profile.model, spec))
        return reports

    if profile.kind == "kgd3d":
        state = state_from_profile(profile)
        reports.append(kgd_virial(state, spec))
        return reports

    field = build_family(profile, config.model.family)
    if "virial" in checks:
        reports.append(virial_suite(field, profile.omega, profile.model, spec))
    elif "functionals" in checks:
        reports.append(dirac_functionals(field, profile.omega, profile.model, spec))
    if "symmetry" in checks:
        reports.append(symmetry_integrals(field, spec))
    if "angular" in checks:
        reports.append(angular_checks(field))
    if "convergence" in checks:
        reports.append(convergence_check(profile, spec=spec))
    return reports


def boost_pipeline(config: RunConfig, profile: RadialProfile) -> List[FunctionalReport]:
    """Relation rows for every configured velocity and time sample."""
    _check_kind(config, profile)
    experiment = config.experiment
    spec = build_spec(config)
    velocities = [np.asarray(v, dtype=float) for v in experiment.velocities]
    if not velocities:
        logging.info("No velocities configured; emitting an empty relation table.")
        return [FunctionalReport("relation_check", context={"omega": profile.omega, "velocities": 0})]

    if profile.kind == "kgd3d":
        return [kgd_relation_check(state_from_profile(profile), velocities, experiment.t_samples, spec,
                                   experiment.tolerance)]
    if profile.kind == "dirac1d":
        base = build_line_field(profile)
        velocities = [v[:1] for v in velocities]
        tolerance = min(experiment.tolerance, 1e-6)
    else:
        base = build_family(profile, config.model.family)
        tolerance = experiment.tolerance
    return [relation_check(base, profile.omega, velocities, experiment.t_samples, profile.model, spec, tolerance)]


def md_report_pipeline(config: RunConfig, profile: RadialProfile) -> Tuple[object, List[FunctionalReport]]:
    """MD potentials of the family field, their functionals and the boosted-field oracles."""
    if profile.kind not in PROFILE_KINDS["dirac3d"]:
        raise ConfigError(f"md-report needs a dirac3d profile, got {profile.kind}")
    spec = build_spec(config)
    field = build_family(profile, config.model.family)
    potentials = md_potentials(field)
    report = md_functionals(field, potentials, spec, profile.omega)
    points = sample_points(field, count=8)
    for index, velocity in enumerate(config.experiment.velocities):
        frame = boost_frame(velocity)
        for t in config.experiment.t_samples:
            residuals = md_boost_residuals(potentials, frame, t, points + frame.v * t)
            report.merge(residuals, prefix=f"v{index}_t{t}_")
    return potentials, [report]


def _emit(reports, config: RunConfig, stem):
    payload_config = config.dict()
    fmt = config.output.format
    text = render(reports, fmt, payload_config)
    ext = ".json" if fmt == "structured" else ".txt"
    write_report(text, os.path.join(config.output.directory, stem + ext))
    typer.echo(text)
    passed = all(r.passed for r in reports)
    if not passed:
        failed = [name for r in reports for name in r.failures()]
        logging.warning(f"Failing identities: {failed}")
    return EXIT_PASS if passed else EXIT_IDENTITY


def _fail(exc, code):
    typer.echo(json.dumps(error_object(exc)))
    return code


def _run(command, config_path, overrides, body) -> int:
    logging.basicConfig(level=LOG_LEVEL, format='%(asctime)s - %(levelname)s - %(message)s', stream=sys.stderr)
    try:
        config = load_config(config_path, overrides)
        logging.info(f"{command}: configuration resolved")
        return body(config)
    except ConfigError as e:
        logging.error(f"Configuration error in {command}: {e}", exc_info=True)
        return _fail(e, EXIT_CONFIG)
    except ProfileFormatError as e:
        logging.error(f"Malformed profile for {command}: {e}", exc_info=True)
        return _fail(e, EXIT_CONFIG)
    except SolitonLabError as e:
        logging.error(f"{command} failed: {e}", exc_info=True)
        return _fail(e, EXIT_SOLVER)
    except (FileNotFoundError, ValueError) as e:
        logging.error(f"Invalid input for {command}: {e}", exc_info=True)
        return _fail(e, EXIT_CONFIG)


def _overrides(out, fmt, threads, **extra):
    values = {"output.directory": out, "output.format": fmt, "threads": threads}
    values.update(extra)
    return values


ConfigOption = typer.Option(None, "--config", help="YAML run configuration.")
OutOption = typer.Option(None, "--out", help="Output directory.")
FormatOption = typer.Option(None, "--format", help="text or structured.")
ThreadsOption = typer.Option(None, "--threads", help="Worker threads for quadrature and boost rows.")


@app.command()
def solve(config: Optional[str] = ConfigOption, out: Optional[str] = OutOption, fmt: Optional[str] = FormatOption,
          threads: Optional[int] = ThreadsOption):
    """Solve the configured stationary state and write its profile."""
    def body(cfg):
        profile, reports, _ = solve_pipeline(cfg)
        path = write_profile(profile, os.path.join(cfg.output.directory, "profile.dat"))
        reports[0].context["profile"] = path
        return _emit(reports, cfg, "solve")

    raise typer.Exit(code=_run("solve", config, _overrides(out, fmt, threads), body))


@app.command("kgd-solve")
def kgd_solve(config: Optional[str] = ConfigOption, out: Optional[str] = OutOption, fmt: Optional[str] = FormatOption,
              threads: Optional[int] = ThreadsOption):
    """Self-consistent Klein-Gordon-Dirac solve followed by its functionals and virial identities."""
    def body(cfg):
        profile, reports, state = solve_pipeline(cfg)
        write_profile(profile, os.path.join(cfg.output.directory, "profile.dat"))
        functionals = kgd_functionals(state, build_spec(cfg))
        reports.append(kgd_virial(state, build_spec(cfg), functionals=functionals))
        return _emit(reports, cfg, "kgd_solve")

    overrides = _overrides(out, fmt, threads, **{"model.equation": "kgd"})
    raise typer.Exit(code=_run("kgd-solve", config, overrides, body))


@app.command()
def verify(profile: str = typer.Argument(..., help="Profile file written by solve."),
           config: Optional[str] = ConfigOption, out: Optional[str] = OutOption, fmt: Optional[str] = FormatOption,
           threads: Optional[int] = ThreadsOption):
    """Run the identity suites on a stored profile; exit 4 if any asserted identity fails."""
    def body(cfg):
        loaded = read_profile(profile)
        reports = verify_pipeline(cfg, loaded)
        if loaded.dim == 3 and loaded.kind != "kgd3d":
            field = build_family(loaded, cfg.model.family)
            dump_field(field, sample_points(field), os.path.join(cfg.output.directory, "field_samples.csv"))
        return _emit(reports, cfg, "verify")

    raise typer.Exit(code=_run("verify", config, _overrides(out, fmt, threads), body))


BOOST_COLUMNS = ["v1", "v2", "v3", "t", "gamma", "E_v", "gammaE0", "P_v1", "P_v2", "P_v3",
                 "gammavE0_1", "gammavE0_2", "gammavE0_3", "Q_v", "Q0", "E_v_over_E0", "pass"]


@app.command()
def boost(profile: str = typer.Argument(..., help="Profile file written by solve."),
          config: Optional[str] = ConfigOption, out: Optional[str] = OutOption, fmt: Optional[str] = FormatOption,
          threads: Optional[int] = ThreadsOption):
    """Energy-momentum relations of boosted waves; the rows are also written as boost.csv."""
    def body(cfg):
        reports = boost_pipeline(cfg, read_profile(profile))
        rows = reports[0].rows
        write_table(rows, os.path.join(cfg.output.directory, "boost.csv"), columns=None if rows else BOOST_COLUMNS)
        return _emit(reports, cfg, "boost")

    raise typer.Exit(code=_run("boost", config, _overrides(out, fmt, threads), body))


@app.command("md-report")
def md_report(profile: str = typer.Argument(..., help="dirac3d profile file."),
              config: Optional[str] = ConfigOption, out: Optional[str] = OutOption, fmt: Optional[str] = FormatOption,
              threads: Optional[int] = ThreadsOption):
    """Maxwell-Dirac potentials, field energies and boosted-field residuals of a given spinor."""
    def body(cfg):
        loaded = read_profile(profile)
        potentials, reports = md_report_pipeline(cfg, loaded)
        radii = loaded.grid[:: max(1, len(loaded.grid) // 200)]
        write_potential_table(potentials, radii, os.path.join(cfg.output.directory, "potentials.csv"))
        return _emit(reports, cfg, "md_report")

    raise typer.Exit(code=_run("md-report", config, _overrides(out, fmt, threads), body))


if __name__ == "__main__":
    app()
