# functionals.py

from __future__ import annotations

import logging
import math

import numpy as np

from ansatz import FamilyField, LineField, SpinorField
from clifford import dirac_algebra
from profiles import NonlinearityModel, RadialProfile, solve_gross_neveu_1d, solve_soler_radial
from quadrature import QuadratureSpec, contracted_box, gated_integrate, radial_rule
from reports import FunctionalReport

AGREEMENT_TOL = 1e-6
VIRIAL_TOL = 1e-5
VIRIAL_1D_TOL = 1e-8


def _measure(dim):
    """Angular factor of the reduced integral: 4 pi r^2 dr in 3D, both half-lines in 1D."""
    return 4.0 * math.pi if dim == 3 else 2.0


def radial_densities(profile: RadialProfile, model: NonlinearityModel, r):
    """
    Pointwise densities of a radial pair at radii r, from the spline in s = r^2.

    kinetic is the density whose integral is I_1 + I_2 + I_3 (or I in 1D):
    sign * [f (h' + (d-1) h/r) - h f'] with f = E, h = r O.
    """
    interp = profile.interpolant
    s_r = r * r
    even, odd = interp.even(s_r), interp.odd(s_r)
    even_ds, odd_ds = interp.even_ds(s_r), interp.odd_ds(s_r)
    f2, h2 = even * even, s_r * odd * odd
    scalar = profile.sign * (f2 - h2)
    kinetic = profile.sign * (even * (profile.dim * odd + 2.0 * s_r * odd_ds) - 2.0 * s_r * odd * even_ds)
    g = model.g(scalar)
    G = model.G(scalar)
    return {
        "rho": f2 + h2,
        "scalar": scalar,
        "kinetic": kinetic,
        "potential": profile.mass * scalar - G,
        "g_s_minus_G": g * scalar - G,
        "g_minus_m_s": (g - profile.mass) * scalar,
        "scalar_squared": scalar * scalar,
    }


def reduced_integrals(profile: RadialProfile, model: NonlinearityModel = None, spec: QuadratureSpec = None) -> dict:
    """Radial quadratures of every density in radial_densities, with the angular measure applied."""
    model = profile.model if model is None else model
    spec = spec or QuadratureSpec()
    r, w = radial_rule(np.asarray(profile.grid), spec)
    weights = _measure(profile.dim) * w * r ** (profile.dim - 1)
    densities = radial_densities(profile, model, r)
    return {key: math.fsum(weights * values) for key, values in densities.items()}


def _dirac_integrand(field: SpinorField, mass, model):
    algebra = dirac_algebra()
    beta = np.diag(algebra.beta).real

    def integrand(points):
        phi = field.evaluate(points)
        grad = field.gradient(points)
        conj = np.conj(phi)
        scalar = np.sum(beta * np.abs(phi) ** 2, axis=1)
        g, G = model.g(scalar), model.G(scalar)
        out = {
            "Q": np.sum(np.abs(phi) ** 2, axis=1),
            "V": mass * scalar - G,
            "g_s_minus_G": g * scalar - G,
            "g_minus_m_s": (g - mass) * scalar,
        }
        for k, a_k in enumerate(algebra.alpha):
            out[f"I{k + 1}"] = -1j * np.sum(conj * (grad[:, k] @ a_k.T), axis=1)
            out[f"alpha{k + 1}"] = np.sum(conj * (phi @ a_k.T), axis=1)
            out[f"momentum{k + 1}"] = -1j * np.sum(conj * grad[:, k], axis=1)
        return out

    return integrand


def direct_integrals(field: SpinorField, mass, model: NonlinearityModel, spec: QuadratureSpec = None) -> dict:
    """Tensor Gauss-Legendre quadrature of the 3D densities over a cube of breaks[-1] decay lengths."""
    spec = spec or QuadratureSpec()

    def make_grid(s):
        return contracted_box(np.zeros(3), [0.0, 0.0, 1.0], field.decay_length, 1.0, s)

    totals = gated_integrate(_dirac_integrand(field, mass, model), make_grid, spec, scale_keys=["Q"])
    values = {key: value.real for key, value in totals.items()}
    values["imag_residual"] = max(abs(value.imag) for key, value in totals.items() if key.startswith("I"))
    return values


def _field_mass(field):
    return field.profile.mass if field.profile is not None else 1.0


def dirac_functionals(field: SpinorField, omega, model: NonlinearityModel = None,
                      spec: QuadratureSpec = None, direct=True) -> FunctionalReport:
    """
    I_k, Q, V and E0 = I_1 + I_2 + I_3 + V of a 3D field.

    Family fields are evaluated both through their radial reduction and by direct
    3D quadrature, and the two must agree. Other fields use the direct path only.
    """
    model = field.profile.model if model is None else model
    spec = spec or QuadratureSpec()
    mass = _field_mass(field)
    report = FunctionalReport("dirac_functionals", context={"omega": omega, **model.describe()})

    reduced = None
    if isinstance(field, FamilyField):
        radial = reduced_integrals(field.profile, model, spec)
        reduced = {
            "Q": radial["rho"], "V": radial["potential"], "sum_I": radial["kinetic"],
            "g_s_minus_G": radial["g_s_minus_G"], "g_minus_m_s": radial["g_minus_m_s"],
            "scalar_squared": radial["scalar_squared"],
        }
        for k in range(3):
            reduced[f"I{k + 1}"] = radial["kinetic"] / 3.0
        report.values.update({f"reduced_{key}": value for key, value in reduced.items()})

    if direct or reduced is None:
        box = direct_integrals(field, mass, model, spec)
        box["sum_I"] = box["I1"] + box["I2"] + box["I3"]
        report.values.update({f"direct_{key}": value for key, value in box.items()})
        if reduced is not None:
            scale = max(abs(reduced["Q"]), abs(reduced["sum_I"]), abs(reduced["V"]))
            for key in ("Q", "V", "I1", "I2", "I3", "g_s_minus_G"):
                report.add(f"reduced_vs_direct_{key}", f"radial {key} = direct 3D {key}",
                           reduced[key], box[key], AGREEMENT_TOL, scale)
            report.add("imaginary_parts", "Im I_k = 0", box["imag_residual"], 0.0, AGREEMENT_TOL,
                       residual=box["imag_residual"] / scale if scale else 0.0)
    primary = reduced if reduced is not None else box

    for key in ("Q", "V", "I1", "I2", "I3", "sum_I"):
        report.values[key] = primary[key]
    energy = primary["sum_I"] + primary["V"]
    report.values["E0"] = energy
    report.values["omegaQ_minus_V_minus_two_thirds_sum_I"] = omega * primary["Q"] - primary["V"] - 2.0 * primary["sum_I"] / 3.0

    if not isinstance(field, FamilyField) or direct:
        source = box if (direct or reduced is None) else primary
        spread = max(source["I1"], source["I2"], source["I3"]) - min(source["I1"], source["I2"], source["I3"])
        report.add("isotropy", "I1 = I2 = I3", spread, 0.0, AGREEMENT_TOL,
                   residual=spread / abs(source["sum_I"]) if source["sum_I"] else 0.0)
    report.add("energy_positive", "I1 + I2 + I3 + V > 0", energy, 0.0, 0.0,
               residual=0.0 if energy > 0 else math.inf, asserted=primary["Q"] > 0)
    logging.info(f"Functionals at omega={omega}: Q={primary['Q']:.10g} E0={energy:.10g}")
    return report


def virial_suite(field: SpinorField, omega, model: NonlinearityModel = None, spec: QuadratureSpec = None,
                 tolerance=VIRIAL_TOL, functionals: FunctionalReport = None) -> FunctionalReport:
    """
    Identities satisfied by every localized stationary solution:

      (a) omega Q = V + (2/3) sum_I
      (b) sum_I = omega Q + int (g - m) s
      (c) sum_I = 3 int (g s - G) > 0
      (d) omega <phi, alpha_k phi> = <phi, -i d_k phi>, k = 1..3
      (e) E0 = omega Q + int (g s - G)

    Reduced radial values are used where the field allows it; (d) always comes
    from direct quadrature.
    """
    model = field.profile.model if model is None else model
    spec = spec or QuadratureSpec()
    base = functionals or dirac_functionals(field, omega, model, spec, direct=True)
    values = base.values
    prefix = "reduced_" if "reduced_Q" in values else "direct_"
    q, v, sum_i = values[prefix + "Q"], values[prefix + "V"], values[prefix + "sum_I"]
    gsg, gms = values[prefix + "g_s_minus_G"], values[prefix + "g_minus_m_s"]
    energy = sum_i + v

    report = FunctionalReport("virial_suite", context=dict(base.context))
    report.merge(base)
    scale = max(abs(omega * q), abs(v), abs(sum_i))
    report.add("virial_a", "omega Q = V + (2/3) sum I", omega * q, v + 2.0 * sum_i / 3.0, tolerance, scale)
    report.add("virial_b", "sum I = omega Q + int (g - m) s", sum_i, omega * q + gms, tolerance, scale)
    report.add("virial_c", "sum I = 3 int (g s - G)", sum_i, 3.0 * gsg, tolerance, scale)
    report.add("virial_c_positive", "int (g s - G) > 0", gsg, 0.0, 0.0,
               residual=0.0 if gsg > 0 else math.inf, asserted=q > 0)
    report.add("virial_e", "E0 = omega Q + int (g s - G)", energy, omega * q + gsg, tolerance, scale)
    if model.kind == "soler_linear" and prefix == "reduced_":
        closed = 1.5 * model.lam * values["reduced_scalar_squared"]
        report.add("soler_closed_form", "3 int (g s - G) = (3 lambda / 2) int s^2", 3.0 * gsg, closed, tolerance, scale)
    if "direct_alpha1" in values:
        norm = values["direct_Q"]
        for k in range(1, 4):
            lhs, rhs = omega * values[f"direct_alpha{k}"], values[f"direct_momentum{k}"]
            report.add(f"virial_d{k}", f"omega <phi, alpha_{k} phi> = <phi, -i d_{k} phi>", lhs, rhs, tolerance,
                       residual=abs(lhs - rhs) / norm if norm else 0.0)
    failed = report.failures()
    if failed:
        logging.info(f"Virial suite at omega={omega}: failing {failed}")
    return report


def _line_integrand(field: SpinorField, mass, model):
    algebra = dirac_algebra()
    beta = np.diag(algebra.beta1d).real

    def integrand(points):
        phi = field.evaluate(points)
        grad = field.gradient(points)[:, 0]
        conj = np.conj(phi)
        scalar = np.sum(beta * np.abs(phi) ** 2, axis=1)
        return {
            "Q": np.sum(np.abs(phi) ** 2, axis=1),
            "V": mass * scalar - model.G(scalar),
            "I": -1j * np.sum(conj * (grad @ algebra.alpha1d.T), axis=1),
            "alpha": np.sum(conj * (phi @ algebra.alpha1d.T), axis=1),
            "derivative": np.sum(conj * grad, axis=1),
        }

    return integrand


def dirac_functionals_1d(field: SpinorField, omega, model: NonlinearityModel = None,
                         spec: QuadratureSpec = None, tolerance=VIRIAL_1D_TOL) -> FunctionalReport:
    """
    I, Q, V and E0 = I + V of a 1D field with the checks omega Q = V,
    omega <phi, alpha phi> = <phi, -i phi'> and <phi, phi'> = 0.
    """
    if field.dim != 1:
        raise ValueError("dirac_functionals_1d needs a 1D field.")
    model = field.profile.model if model is None else model
    spec = spec or QuadratureSpec()
    mass = _field_mass(field)

    def make_grid(s):
        return contracted_box(np.zeros(1), [1.0], field.decay_length, 1.0, s, dim=1)

    line = gated_integrate(_line_integrand(field, mass, model), make_grid, spec, scale_keys=["Q"])
    q, v, kinetic = line["Q"].real, line["V"].real, line["I"].real
    report = FunctionalReport("dirac_functionals_1d", context={"omega": omega, **model.describe()})
    report.values.update({"Q": q, "V": v, "I": kinetic, "E0": kinetic + v, "omegaQ_minus_V": omega * q - v})

    if isinstance(field, LineField):
        radial = reduced_integrals(field.profile, model, spec)
        report.values.update({"reduced_Q": radial["rho"], "reduced_V": radial["potential"], "reduced_I": radial["kinetic"]})
        scale = max(abs(q), abs(v), abs(kinetic))
        report.add("reduced_vs_direct_Q", "half-line Q = line Q", radial["rho"], q, AGREEMENT_TOL, scale)
        report.add("reduced_vs_direct_I", "half-line I = line I", radial["kinetic"], kinetic, AGREEMENT_TOL, scale)

    report.add("charge_potential", "omega Q = V", omega * q, v, tolerance)
    lhs, rhs = omega * line["alpha"], -1j * line["derivative"]
    report.add("stationarity", "omega <phi, alpha phi> = <phi, -i phi'>", abs(lhs), abs(rhs), tolerance,
               residual=abs(lhs - rhs) / q if q else 0.0)
    report.add("translation", "<phi, phi'> = 0", abs(line["derivative"]), 0.0, tolerance,
               residual=abs(line["derivative"]) / q if q else 0.0)
    report.add("energy_positive", "I + V > 0", kinetic + v, 0.0, 0.0,
               residual=0.0 if kinetic + v > 0 else math.inf, asserted=q > 0)
    logging.info(f"1D functionals at omega={omega}: Q={q:.12g} V={v:.12g} I={kinetic:.12g}")
    return report


def _resolve(profile: RadialProfile, grid_points, r_max):
    if profile.kind == "dirac1d":
        return solve_gross_neveu_1d(profile.omega, profile.mass, profile.model, x_max=r_max, grid_points=grid_points)
    if profile.kind in ("dirac3d_plus", "dirac3d_minus"):
        return solve_soler_radial(profile.omega, profile.mass, profile.model, profile.sign, profile.nodes,
                                  r_max=r_max, grid_points=grid_points)
    raise ValueError(f"No re-solve available for {profile.kind} profiles.")


def convergence_check(profile: RadialProfile, *, grid_factor=2, r_max_factor=1, tolerance=AGREEMENT_TOL,
                      spec: QuadratureSpec = None) -> FunctionalReport:
    """
    Re-solve on a grid refined by grid_factor (and R_max stretched by
    r_max_factor at the same spacing) and compare the reduced functionals.
    """
    spec = spec or QuadratureSpec()
    intervals = len(profile.grid) - 1
    points = intervals * grid_factor * r_max_factor + 1
    finer = _resolve(profile, points, profile.r_max * r_max_factor)
    coarse_values = reduced_integrals(profile, spec=spec)
    fine_values = reduced_integrals(finer, spec=spec)

    report = FunctionalReport("convergence_check", context={"grid_factor": grid_factor, "r_max_factor": r_max_factor})
    names = {"rho": "Q", "potential": "V", "kinetic": "sum_I"}
    scale = max(abs(fine_values[k]) for k in names)
    for key, label in names.items():
        report.values[f"{label}_coarse"] = coarse_values[key]
        report.values[f"{label}_fine"] = fine_values[key]
        report.add(f"refinement_{label}", f"{label} unchanged under refinement",
                   coarse_values[key], fine_values[key], tolerance, scale)
    report.values["decay_coarse"] = profile.decay
    report.values["decay_fine"] = finer.decay
    return report
