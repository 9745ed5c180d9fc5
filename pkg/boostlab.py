# boostlab.py

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from ansatz import FamilyField, SpinorField
from clifford import BoostFrame, boost_frame, dirac_algebra
from errors import QuadratureError
from functionals import dirac_functionals, dirac_functionals_1d
from profiles import NonlinearityModel
from quadrature import QuadratureSpec, contracted_box, gated_integrate
from reports import FunctionalReport, relative_residual

RELATION_TOL = 1e-4
PDE_TOL = 1e-6
FD_STEP = 1e-5


@dataclass(frozen=True)
class MovingWave:
    """
    psi_v(t, x) = exp(i theta) S_v phi(y) with
    y = x + kappa v (v.x) - gamma v t and theta = -omega gamma (t - v.x).
    """

    base: SpinorField
    frame: BoostFrame

    @property
    def dim(self) -> int:
        return self.frame.dim

    @property
    def omega(self) -> float:
        return self.base.omega

    @property
    def velocity(self) -> np.ndarray:
        return self.frame.v

    def _points(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise ValueError(f"Expected points of dimension {self.dim}, got {x.shape[1]}.")
        return x

    def coordinates(self, t, x) -> np.ndarray:
        """Rest-frame argument y of the standing profile."""
        x = self._points(x)
        return x @ self.frame.contraction().T - self.frame.gamma * t * self.frame.v

    def _phase(self, t, x):
        return np.exp(-1j * self.omega * self.frame.gamma * (t - x @ self.frame.v))

    def evaluate(self, t, x) -> np.ndarray:
        x = self._points(x)
        phi = self.base.evaluate(self.coordinates(t, x))
        return self._phase(t, x)[:, None] * (phi @ self.frame.s.T)

    def gradient(self, t, x) -> np.ndarray:
        """(n, d, c) array of d_j psi."""
        x = self._points(x)
        y = self.coordinates(t, x)
        s_phi = self.base.evaluate(y) @ self.frame.s.T
        s_grad = self.base.gradient(y) @ self.frame.s.T
        chain = np.einsum("lj,nlc->njc", self.frame.contraction(), s_grad)
        boost = 1j * self.omega * self.frame.gamma * self.frame.v[None, :, None] * s_phi[:, None, :]
        return self._phase(t, x)[:, None, None] * (boost + chain)

    def time_derivative(self, t, x) -> np.ndarray:
        x = self._points(x)
        y = self.coordinates(t, x)
        gamma = self.frame.gamma
        s_phi = self.base.evaluate(y) @ self.frame.s.T
        s_grad = self.base.gradient(y) @ self.frame.s.T
        transport = np.einsum("l,nlc->nc", self.frame.v, s_grad)
        return self._phase(t, x)[:, None] * (-1j * self.omega * gamma * s_phi - gamma * transport)

    def __call__(self, t, x):
        return self.evaluate(t, x)


def moving_wave(base: SpinorField, frame: BoostFrame) -> MovingWave:
    if frame.dim != base.dim:
        raise ValueError(f"A {frame.dim}D frame cannot boost a {base.dim}D field.")
    return MovingWave(base, frame)


def _matrices(dim):
    algebra = dirac_algebra()
    if dim == 1:
        return (algebra.alpha1d,), algebra.beta1d
    return algebra.alpha, algebra.beta


def _fd_derivatives(wave: MovingWave, t, x, step):
    x = wave._points(x)
    dt = (wave.evaluate(t + step, x) - wave.evaluate(t - step, x)) / (2.0 * step)
    grads = []
    for j in range(wave.dim):
        e = np.zeros(wave.dim)
        e[j] = step
        grads.append((wave.evaluate(t, x + e) - wave.evaluate(t, x - e)) / (2.0 * step))
    return dt, np.stack(grads, axis=1)


def _equation_terms(wave, t, x, model, dt, grad):
    alphas, beta = _matrices(wave.dim)
    psi = wave.evaluate(t, x)
    beta_psi = psi @ beta.T
    scalar = np.real(np.sum(np.conj(psi) * beta_psi, axis=1))
    mass = wave.base.profile.mass
    streaming = sum(grad[:, j] @ a.T for j, a in enumerate(alphas))
    terms = (1j * dt, 1j * streaming, -mass * beta_psi, model.g(scalar)[:, None] * beta_psi)
    residual = sum(terms)
    scale = sum(np.linalg.norm(term, axis=1) for term in terms)
    return residual, scale


def pde_residual(wave: MovingWave, t, x, model: NonlinearityModel = None, method="analytic", step=FD_STEP) -> float:
    """
    max over points of |i psi_t + i alpha.grad psi - m beta psi + g(psi-bar psi) beta psi|
    relative to the sum of the magnitudes of its four terms. `method="fd"` replaces
    the analytic derivatives by central differences.
    """
    model = wave.base.profile.model if model is None else model
    x = wave._points(x)
    if method == "analytic":
        dt, grad = wave.time_derivative(t, x), wave.gradient(t, x)
    elif method == "fd":
        dt, grad = _fd_derivatives(wave, t, x, step)
    else:
        raise ValueError(f"Unknown derivative method: {method}")
    residual, scale = _equation_terms(wave, t, x, model, dt, grad)
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.max(np.linalg.norm(residual, axis=1) / scale))


def derivative_check(wave: MovingWave, t, x, step=FD_STEP) -> float:
    """Disagreement of the analytic (psi_t, grad psi) with central differences, relative to the largest entry."""
    x = wave._points(x)
    dt_fd, grad_fd = _fd_derivatives(wave, t, x, step)
    dt, grad = wave.time_derivative(t, x), wave.gradient(t, x)
    scale = max(np.max(np.abs(dt)), np.max(np.abs(grad)), 1e-300)
    return float(max(np.max(np.abs(dt - dt_fd)), np.max(np.abs(grad - grad_fd))) / scale)


def observable_integrand(wave: MovingWave, t, model):
    alphas, beta = _matrices(wave.dim)
    mass = wave.base.profile.mass

    def integrand(points):
        psi = wave.evaluate(t, points)
        grad = wave.gradient(t, points)
        conj = np.conj(psi)
        scalar = np.real(np.sum(conj * (psi @ beta.T), axis=1))
        streaming = sum(grad[:, j] @ a.T for j, a in enumerate(alphas))
        out = {
            "E": np.real(np.sum(conj * (-1j * streaming), axis=1)) + mass * scalar - model.G(scalar),
            "Q": np.sum(np.abs(psi) ** 2, axis=1),
        }
        for j in range(wave.dim):
            out[f"P{j + 1}"] = np.real(-1j * np.sum(conj * grad[:, j], axis=1))
        return out

    return integrand


def observation_box(wave: MovingWave, t, spec: QuadratureSpec):
    """Box centered at v t, contracted by gamma along v."""
    v = wave.velocity
    direction = v if wave.dim == 3 else [1.0]
    return contracted_box(v * t, direction, wave.base.decay_length, wave.frame.gamma, spec, dim=wave.dim)


def boosted_observables(wave: MovingWave, t, model: NonlinearityModel = None, spec: QuadratureSpec = None) -> FunctionalReport:
    """E_v, P_v and Q_v of the moving wave at time t by direct quadrature in the lab frame."""
    model = wave.base.profile.model if model is None else model
    spec = spec or QuadratureSpec()
    totals = gated_integrate(observable_integrand(wave, t, model), lambda s: observation_box(wave, t, s), spec,
                             scale_keys=["E", "Q"])
    report = FunctionalReport("boosted_observables", context={"v": wave.velocity.tolist(), "t": t})
    report.values["E_v"] = totals["E"].real
    report.values["Q_v"] = totals["Q"].real
    for j in range(wave.dim):
        report.values[f"P_v{j + 1}"] = totals[f"P{j + 1}"].real
    report.values["gamma"] = wave.frame.gamma
    return report


def _rest_values(base: SpinorField, omega, model, spec):
    if base.dim == 1:
        values = dirac_functionals_1d(base, omega, model, spec).values
    else:
        values = dirac_functionals(base, omega, model, spec, direct=not isinstance(base, FamilyField)).values
    return values["E0"], values["Q"]


def _row(base, v, t, model, spec):
    try:
        frame = boost_frame(v)
        observed = boosted_observables(moving_wave(base, frame), t, model, spec).values
        return {"v": v, "t": t, "gamma": frame.gamma, **observed, "error": None}
    except QuadratureError as err:
        logging.error(f"Boosted quadrature failed for v={list(v)}, t={t}: {err}")
        return {"v": v, "t": t, "gamma": boost_frame(v).gamma, "error": str(err)}


def relation_check(base: SpinorField, omega, velocities: Sequence, t_samples: Sequence, model: NonlinearityModel = None,
                   spec: QuadratureSpec = None, tolerance=RELATION_TOL) -> FunctionalReport:
    """
    Compare E_v, P_v, Q_v of every boosted wave with gamma E0, gamma v E0 and Q0,
    check that each is independent of t, and that E_v increases with |v| along every ray.
    """
    model = base.profile.model if model is None else model
    spec = spec or QuadratureSpec()
    e0, q0 = _rest_values(base, omega, model, spec)
    dim = base.dim
    vectors = [np.atleast_1d(np.asarray(v, dtype=float)).reshape(dim) for v in velocities]

    row_spec = replace(spec, threads=1)
    jobs = (delayed(_row)(base, v, t, model, row_spec) for v in vectors for t in t_samples)
    rows = Parallel(n_jobs=spec.threads, prefer="threads")(jobs)

    report = FunctionalReport("relation_check", context={"omega": omega, "dim": dim, "tolerance": tolerance})
    report.values.update({"E0": e0, "Q0": q0})
    for index, row in enumerate(rows):
        v, t, gamma = row["v"], row["t"], row["gamma"]
        label = f"v={np.round(v, 6).tolist()},t={t}"
        record = {f"v{j + 1}": float(v[j]) for j in range(dim)}
        record.update({"t": t, "gamma": gamma, "E_v": math.nan, "gammaE0": gamma * e0, "Q_v": math.nan, "Q0": q0})
        record.update({f"P_v{j + 1}": math.nan for j in range(dim)})
        record.update({f"gammavE0_{j + 1}": gamma * v[j] * e0 for j in range(dim)})
        if row["error"] is not None:
            record.update({"error": row["error"], "pass": False})
            report.add(f"quadrature[{label}]", "quadrature converged", 1.0, 0.0, 0.0, residual=math.inf)
            report.rows.append(record)
            continue
        momentum = np.array([row[f"P_v{j + 1}"] for j in range(dim)])
        expected = gamma * v * e0
        record.update({"E_v": row["E_v"], "Q_v": row["Q_v"], "E_v_over_E0": row["E_v"] / e0})
        record.update({f"P_v{j + 1}": float(momentum[j]) for j in range(dim)})
        checks = [
            report.add(f"energy[{label}]", "E_v = gamma E0", row["E_v"], gamma * e0, tolerance,
                       residual=abs(row["E_v"] - gamma * e0) / abs(e0)),
            report.add(f"momentum[{label}]", "P_v = gamma v E0", float(np.linalg.norm(momentum)),
                       float(np.linalg.norm(expected)), tolerance,
                       residual=float(np.linalg.norm(momentum - expected)) / abs(e0)),
            report.add(f"charge[{label}]", "Q_v = Q0", row["Q_v"], q0, tolerance,
                       residual=abs(row["Q_v"] - q0) / abs(q0)),
        ]
        record.update({
            "energy_residual": checks[0].residual,
            "momentum_residual": checks[1].residual,
            "charge_residual": checks[2].residual,
            "pass": all(c.passed for c in checks),
        })
        report.rows.append(record)

    _conservation_checks(report, rows, vectors, e0, q0, tolerance)
    _monotonicity_check(report, rows, t_samples)
    logging.info(f"Relation check over {len(vectors)} velocities: {len(report.failures())} failing checks")
    return report


def _conservation_checks(report, rows, vectors, e0, q0, tolerance):
    for v in vectors:
        same = [r for r in rows if r["error"] is None and np.array_equal(r["v"], v)]
        if len(same) < 2:
            continue
        label = f"v={np.round(v, 6).tolist()}"
        for key, scale in (("E_v", e0), ("Q_v", q0)):
            spread = max(r[key] for r in same) - min(r[key] for r in same)
            report.add(f"conservation_{key}[{label}]", f"{key} independent of t", spread, 0.0, tolerance,
                       residual=spread / abs(scale))


def _monotonicity_check(report, rows, t_samples):
    """Along each ray (same direction of v), E_v increases strictly with |v| at the first sample time."""
    if not t_samples:
        return
    rays = {}
    for row in rows:
        if row["error"] is not None or row["t"] != t_samples[0]:
            continue
        speed = float(np.linalg.norm(row["v"]))
        key = (0.0,) * len(row["v"]) if speed == 0 else tuple(np.round(row["v"] / speed, 9))
        rays.setdefault(key, []).append((speed, row["E_v"]))
    at_rest = rays.pop((0.0,) * len(rows[0]["v"]), []) if rows else []
    for direction, points in rays.items():
        points = sorted(points + at_rest)
        if len(points) < 2:
            continue
        increasing = all(b[1] > a[1] for a, b in zip(points, points[1:]) if b[0] > a[0])
        report.add(f"monotone_energy[{list(direction)}]", "E_v increases with |v|", float(increasing), 1.0, 0.0,
                   residual=0.0 if increasing else math.inf)


def four_current(spinor, dim) -> np.ndarray:
    """(n, 1 + dim) rows (psi* psi, psi* alpha_k psi)."""
    alphas, _ = _matrices(dim)
    rho = np.sum(np.abs(spinor) ** 2, axis=1)
    flux = [np.real(np.sum(np.conj(spinor) * (spinor @ a.T), axis=1)) for a in alphas]
    return np.stack([rho] + flux, axis=1)


def current_check(wave: MovingWave, t, x) -> float:
    """
    Current four-vector (psi* psi, psi* alpha psi) of the moving wave against
    Lambda_v applied to the rest-frame current at y. Max deviation relative to max rest density.
    """
    x = wave._points(x)
    psi = wave.evaluate(t, x)
    phi = wave.base.evaluate(wave.coordinates(t, x))
    moving, rest = four_current(psi, wave.dim), four_current(phi, wave.dim)
    expected = rest @ wave.frame.lam.T
    scale = max(float(np.max(rest[:, 0])), 1e-300)
    return float(np.max(np.abs(moving - expected)) / scale)


def angular_check_moving(wave: MovingWave, t, x) -> float:
    """
    |M3 psi_v - m3 psi_v| / |psi_v| for a family field boosted along x3,
    with M3 = -i (x1 d2 - x2 d1) + Sigma_3 / 2.
    """
    base = wave.base
    if not isinstance(base, FamilyField):
        raise ValueError("Angular check needs a family field.")
    v = wave.velocity
    if wave.dim != 3 or abs(v[0]) > 0 or abs(v[1]) > 0:
        raise ValueError("Angular check needs a boost along x3.")
    x = wave._points(x)
    psi = wave.evaluate(t, x)
    grad = wave.gradient(t, x)
    orbital = -1j * (x[:, 0, None] * grad[:, 1] - x[:, 1, None] * grad[:, 0])
    total = orbital + 0.5 * psi @ dirac_algebra().spin[2].T
    norm = np.linalg.norm(psi, axis=1)
    keep = norm > 1e-8 * np.max(norm)
    return float(np.max(np.linalg.norm(total - base.m3 * psi, axis=1)[keep] / norm[keep]))


def track_peak(wave: MovingWave, t, extent=None, count=2001) -> float:
    """Position along the unit boost direction (x3 at rest) of the largest |psi| on a line through v t."""
    v = wave.velocity
    speed = float(np.linalg.norm(v))
    if wave.dim == 1:
        direction = np.array([1.0])
    else:
        direction = v / speed if speed else np.array([0.0, 0.0, 1.0])
    extent = 4.0 * wave.base.decay_length if extent is None else extent
    offsets = np.linspace(-extent, extent, count)
    line = (v * t)[None, :] + offsets[:, None] * direction[None, :]
    amplitude = np.linalg.norm(wave.evaluate(t, line), axis=1)
    return float(line[np.argmax(amplitude)] @ direction)


def relative_gamma_error(report: FunctionalReport) -> float:
    """Worst |E_v / (gamma E0) - 1| over the rows of a relation report."""
    worst = 0.0
    for row in report.rows:
        if row.get("error") is None:
            worst = max(worst, relative_residual(row["E_v"], row["gammaE0"]))
    return worst
