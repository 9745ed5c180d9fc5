# ansatz.py

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np
import pandas as pd

from clifford import PAULI, dirac_algebra
from profiles import RadialProfile
from quadrature import QuadratureSpec, box_integrate, contracted_box
from reports import FunctionalReport

# family index -> (profile sign, spin-up/down basis index, overall sign, m3, kappa)
FAMILIES = {
    1: (1, 0, 1, 0.5, 1),
    2: (-1, 0, 1, 0.5, -1),
    3: (1, 1, 1, -0.5, 1),
    4: (-1, 1, -1, -0.5, -1),
}

_BASIS = (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex))


class SpinorField:
    """
    Evaluatable map x -> C^4 (dim 3) or C^2 (dim 1) with analytic gradient.

    Subclasses implement evaluate(points) -> (n, c) and gradient(points) -> (n, d, c).
    """

    dim = 3
    family = None
    profile = None

    def __init__(self, omega, decay_length):
        self.omega = float(omega)
        self.decay_length = float(decay_length)

    @property
    def components(self) -> int:
        return 4 if self.dim == 3 else 2

    def evaluate(self, points):
        raise NotImplementedError

    def gradient(self, points):
        raise NotImplementedError

    def __call__(self, points):
        return self.evaluate(points)

    def _points(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise ValueError(f"Expected points of dimension {self.dim}, got {points.shape[1]}.")
        return points


class FamilyField(SpinorField):
    """
    One of the four angular families built on a radial pair.

    With P = (sigma . x) chi and chi the spin-up (a = 1, 2) or spin-down (a = 3, 4) basis spinor:
      plus  (a = 1, 3):  (v chi, i (u/r) P)
      minus (a = 2, 4):  ((v/r) P, i u chi), with an overall -1 for a = 4
    """

    def __init__(self, profile: RadialProfile, a: int):
        super().__init__(profile.omega, 1.0 / profile.kappa)
        sign, basis, overall, m3, kappa = FAMILIES[a]
        self.profile = profile
        self.family = a
        self.sign = sign
        self.chi = _BASIS[basis]
        self.overall = overall
        self.m3 = m3
        self.kappa = kappa
        self.interp = profile.interpolant
        self._sigma_chi = np.array([s @ self.chi for s in PAULI])

    def _radial(self, points):
        s = np.einsum("ij,ij->i", points, points)
        return s, self.interp.even(s), self.interp.odd(s)

    def _pvec(self, points):
        return points @ self._sigma_chi

    def evaluate(self, points):
        points = self._points(points)
        _, even, odd = self._radial(points)
        chi_part = even[:, None] * self.chi
        p_part = odd[:, None] * self._pvec(points)
        if self.sign > 0:
            upper, lower = chi_part, 1j * p_part
        else:
            upper, lower = p_part, 1j * chi_part
        return self.overall * np.concatenate([upper, lower], axis=1)

    def gradient(self, points):
        points = self._points(points)
        s, even, odd = self._radial(points)
        even_ds = self.interp.even_ds(s)
        odd_ds = self.interp.odd_ds(s)
        pvec = self._pvec(points)
        # d/dx_k of E(s) chi and O(s) P(x)
        d_chi = 2.0 * (even_ds[:, None] * points)[:, :, None] * self.chi
        d_p = 2.0 * (odd_ds[:, None] * points)[:, :, None] * pvec[:, None, :]
        d_p = d_p + odd[:, None, None] * self._sigma_chi[None, :, :]
        if self.sign > 0:
            upper, lower = d_chi, 1j * d_p
        else:
            upper, lower = d_p, 1j * d_chi
        return self.overall * np.concatenate([upper, lower], axis=2)

    def radial_uv_over_r(self, points):
        """u v / r, shared by both signs since it equals even * odd/r."""
        _, even, odd = self._radial(self._points(points))
        return even * odd


class LineField(SpinorField):
    """1D field (v(x), u(x)) with v even and u odd."""

    dim = 1

    def __init__(self, profile: RadialProfile):
        if profile.kind != "dirac1d":
            raise ValueError("LineField needs a dirac1d profile.")
        super().__init__(profile.omega, 1.0 / profile.kappa)
        self.profile = profile
        self.interp = profile.interpolant

    def evaluate(self, points):
        x = self._points(points)[:, 0]
        s = x * x
        return np.stack([self.interp.even(s), x * self.interp.odd(s)], axis=1).astype(complex)

    def gradient(self, points):
        x = self._points(points)[:, 0]
        s = x * x
        dv = 2.0 * x * self.interp.even_ds(s)
        du = self.interp.odd(s) + 2.0 * s * self.interp.odd_ds(s)
        return np.stack([dv, du], axis=1)[:, None, :].astype(complex)


class ModulatedField(SpinorField):
    """base(x) * exp(i k.x); breaks the reflection symmetries of the families."""

    def __init__(self, base: SpinorField, wavevector):
        super().__init__(base.omega, base.decay_length)
        self.base = base
        self.dim = base.dim
        self.profile = base.profile
        self.wavevector = np.asarray(wavevector, dtype=float).reshape(base.dim)

    def _phase(self, points):
        return np.exp(1j * points @ self.wavevector)

    def evaluate(self, points):
        points = self._points(points)
        return self._phase(points)[:, None] * self.base.evaluate(points)

    def gradient(self, points):
        points = self._points(points)
        phase = self._phase(points)[:, None, None]
        phi = self.base.evaluate(points)
        shift = 1j * self.wavevector[None, :, None] * phi[:, None, :]
        return phase * (self.base.gradient(points) + shift)


def build_family(profile: RadialProfile, a: int) -> FamilyField:
    """Family field a in 1..4; a = 1, 3 need a plus profile, a = 2, 4 a minus profile."""
    if a not in FAMILIES:
        raise ValueError(f"Family index must be 1..4, got {a}")
    if profile.dim != 3:
        raise ValueError("Families are built on 3D profiles.")
    if FAMILIES[a][0] != profile.sign:
        raise ValueError(f"Family {a} needs a {'plus' if FAMILIES[a][0] > 0 else 'minus'} profile, got {profile.kind}.")
    return FamilyField(profile, a)


def build_line_field(profile: RadialProfile) -> LineField:
    return LineField(profile)


def sample_points(field: SpinorField, count=24, seed=7):
    """Deterministic points inside a few decay lengths, avoiding the origin."""
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=(count, field.dim))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    radius = field.decay_length * rng.uniform(0.2, 3.0, size=count)
    return direction * radius[:, None]


def _angular(phi, grad, points):
    """L_k phi = -i eps_kij x_i d_j phi for k = 1..3, shape (3, n, 4)."""
    x1, x2, x3 = points.T
    d1, d2, d3 = grad[:, 0], grad[:, 1], grad[:, 2]
    return -1j * np.stack([
        x2[:, None] * d3 - x3[:, None] * d2,
        x3[:, None] * d1 - x1[:, None] * d3,
        x1[:, None] * d2 - x2[:, None] * d1,
    ])


def _total_angular(field, points):
    phi = field.evaluate(points)
    spin = dirac_algebra().spin
    orbital = _angular(phi, field.gradient(points), points)
    return np.stack([orbital[k] + 0.5 * phi @ spin[k].T for k in range(3)])


def _fd_gradient(fn, points, step):
    cols = []
    for j in range(points.shape[1]):
        e = np.zeros(points.shape[1])
        e[j] = step
        cols.append((fn(points + e) - fn(points - e)) / (2.0 * step))
    return np.stack(cols, axis=1)


def _eigen_residual(applied, phi):
    norm = np.linalg.norm(phi, axis=1)
    return float(np.max(np.linalg.norm(applied, axis=1) / norm))


def angular_checks(field: FamilyField, points=None, tolerance=1e-6) -> FunctionalReport:
    """
    Eigenvalue residuals of M3 = L3 + Sigma3/2, the spin-orbit operator
    K = beta (Sigma.L + 1) and M^2 on the family field at sample points.
    L uses the analytic gradient; the second application inside M^2 uses
    central differences of the first.
    """
    points = sample_points(field) if points is None else np.asarray(points, dtype=float)
    algebra = dirac_algebra()
    phi = field.evaluate(points)
    grad = field.gradient(points)
    orbital = _angular(phi, grad, points)

    m_total = _total_angular(field, points)
    sigma_l = sum(orbital[k] @ algebra.spin[k].T for k in range(3))
    k_phi = (sigma_l + phi) @ algebra.beta.T

    step = 1e-4 * field.decay_length
    m_squared = np.zeros_like(phi)
    for k in range(3):
        def m_k(x, k=k):
            return _total_angular(field, x)[k]
        inner = m_total[k]
        inner_grad = _fd_gradient(m_k, points, step)
        m_squared += _angular(inner, inner_grad, points)[k] + 0.5 * inner @ algebra.spin[k].T

    weight = np.sum(np.abs(phi) ** 2)
    report = FunctionalReport("angular_checks")
    report.values.update({
        "family": field.family,
        "m3": field.m3,
        "kappa": field.kappa,
        "m3_estimate": float(np.real(np.sum(np.conj(phi) * m_total[2])) / weight),
        "kappa_estimate": float(np.real(np.sum(np.conj(phi) * k_phi)) / weight),
        "m_squared_estimate": float(np.real(np.sum(np.conj(phi) * m_squared)) / weight),
    })
    report.add("m3_eigen", "M3 phi = m3 phi", 0.0, 0.0, tolerance,
               residual=_eigen_residual(m_total[2] - field.m3 * phi, phi))
    report.add("spin_orbit_eigen", "K phi = kappa phi", 0.0, 0.0, tolerance,
               residual=_eigen_residual(k_phi - field.kappa * phi, phi))
    report.add("total_angular_momentum", "M^2 phi = 3/4 phi", 0.0, 0.0, tolerance,
               residual=_eigen_residual(m_squared - 0.75 * phi, phi))
    return report


class CurrentDensity(NamedTuple):
    rho: np.ndarray
    current: np.ndarray
    reference: np.ndarray


def current_density(field: SpinorField, points) -> CurrentDensity:
    """
    rho = psi* psi and J = psi* alpha psi at the points. For family fields the
    reference is 4 kappa m3 (u v / r) (-x2, x1, 0), i.e. azimuthal with
    magnitude 2|u v| sin(theta).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    phi = field.evaluate(points)
    rho = np.sum(np.abs(phi) ** 2, axis=1)
    alphas = dirac_algebra().alpha if field.dim == 3 else (dirac_algebra().alpha1d,)
    current = np.stack([np.real(np.einsum("ni,ij,nj->n", np.conj(phi), a, phi)) for a in alphas], axis=1)
    reference = np.full_like(current, np.nan)
    if isinstance(field, FamilyField):
        uv_over_r = field.radial_uv_over_r(points)
        azimuth = np.stack([-points[:, 1], points[:, 0], np.zeros(len(points))], axis=1)
        reference = 4.0 * field.kappa * field.m3 * uv_over_r[:, None] * azimuth
    return CurrentDensity(rho, current, reference)


def _symmetry_integrand(field):
    alphas = dirac_algebra().alpha

    def integrand(points):
        phi = field.evaluate(points)
        grad = field.gradient(points)
        conj = np.conj(phi)
        out = {"Q": np.sum(np.abs(phi) ** 2, axis=1)}
        for l in range(3):
            out[f"grad{l + 1}"] = np.sum(conj * grad[:, l], axis=1)
        for k in range(3):
            a_phi_grad = grad @ alphas[k].T
            for l in range(3):
                if k != l:
                    out[f"alpha{k + 1}_d{l + 1}"] = np.sum(conj * a_phi_grad[:, l], axis=1)
        return out

    return integrand


def symmetry_integrals(field: SpinorField, spec: QuadratureSpec = None, tolerance=1e-8) -> FunctionalReport:
    """int phi* grad phi and int phi* alpha_k d_l phi (k != l), relative to ||phi||^2."""
    spec = spec or QuadratureSpec()
    grid = contracted_box(np.zeros(3), [0.0, 0.0, 1.0], field.decay_length, 1.0, spec)
    totals = box_integrate(_symmetry_integrand(field), grid, spec)
    norm = totals.pop("Q").real
    report = FunctionalReport("symmetry_integrals")
    report.values["Q"] = norm
    for key, value in totals.items():
        report.values[f"{key}_re"] = value.real
        report.values[f"{key}_im"] = value.imag
        relation = f"int phi* {key.replace('_', ' ')} phi = 0"
        report.add(key, relation, abs(value), 0.0, tolerance, residual=abs(value) / norm if norm else 0.0)
    logging.info(f"Symmetry integrals: worst residual {max(c.residual for c in report.checks):.2e}")
    return report


def sample_table(field: SpinorField, points) -> pd.DataFrame:
    """Columns x1.. then Re/Im of every spinor component, for external visualization."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    phi = field.evaluate(points)
    columns = {f"x{j + 1}": points[:, j] for j in range(points.shape[1])}
    for c in range(phi.shape[1]):
        columns[f"Re_psi{c + 1}"] = phi[:, c].real
        columns[f"Im_psi{c + 1}"] = phi[:, c].imag
    return pd.DataFrame(columns)
