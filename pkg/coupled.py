# coupled.py

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple, Optional

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.interpolate import make_interp_spline
from scipy.special import eval_legendre

from ansatz import FamilyField, SpinorField, current_density, sample_points
from boostlab import four_current, moving_wave
from clifford import BoostFrame
from errors import ToleranceError
from functionals import reduced_integrals
from profiles import RadialInterpolant, _fd_derivative
from quadrature import QuadratureSpec, contracted_box, gated_integrate, panel_rule, radial_rule
from reports import FunctionalReport

CONVENTIONS = ("yukawa", "gaussian")
PANEL_ORDER = 8
ANGULAR_ORDER = 16
DECAY_GATE = 1e-8
FD_STEP = 1e-4


def _interval_nodes(grid, order=PANEL_ORDER):
    """Gauss-Legendre nodes and weights on every grid interval, shaped (intervals, order)."""
    nodes, weights = panel_rule(grid, order)
    shape = (len(grid) - 1, order)
    return nodes.reshape(shape), weights.reshape(shape)


def _inner_outer(interval_sums):
    """Cumulative sums from the origin and from the outer end, both sampled at the grid points."""
    inner = np.concatenate([[0.0], np.cumsum(interval_sums)])
    outer = np.concatenate([np.cumsum(interval_sums[::-1])[::-1], [0.0]])
    return inner, outer


def _source_function(source, grid) -> Callable:
    if callable(source):
        return source
    values = np.asarray(source, dtype=float)
    if values.shape != grid.shape:
        raise ValueError("A tabulated source must have the shape of the grid.")
    spline = make_interp_spline(grid ** 2, values, k=5)
    end = grid[-1] ** 2
    return lambda r: np.where(r * r <= end, spline(np.minimum(r * r, end)), 0.0)


@dataclass(frozen=True, eq=False)
class ScalarFieldRadial:
    """
    Spherically symmetric solution of (-Laplacian + M^2) chi = f on a radial grid.

    convention 'yukawa' uses the kernel e^{-M|x|}/(4 pi |x|); 'gaussian' is the
    M = 0 kernel 1/|x| (so -Laplacian chi = 4 pi f). Outside the grid the source
    is taken to vanish and chi continues as c e^{-M r}/r.
    """

    grid: np.ndarray
    values: np.ndarray
    derivative: np.ndarray
    source: np.ndarray
    meson_mass: float
    convention: str = "yukawa"

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    @property
    def prefactor(self) -> float:
        return 4.0 * math.pi if self.convention == "gaussian" else 1.0

    @property
    def charge(self) -> float:
        """Coefficient c of the exterior form c e^{-M r}/r."""
        return float(self.values[-1] * self.r_max * math.exp(self.meson_mass * self.r_max))

    @cached_property
    def interpolant(self) -> RadialInterpolant:
        """chi and chi'/r as splines in r^2."""
        return RadialInterpolant(self.grid, self.values, self.derivative)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        inside = self.interpolant.even(r * r)
        return np.where(r <= self.r_max, inside, self._exterior(r))

    def slope(self, r):
        """d chi / dr."""
        r = np.asarray(r, dtype=float)
        inside = r * self.interpolant.odd(r * r)
        outside = -self._exterior(r) * (self.meson_mass + 1.0 / np.maximum(r, self.r_max))
        return np.where(r <= self.r_max, inside, outside)

    def _exterior(self, r):
        r = np.maximum(np.asarray(r, dtype=float), self.r_max)
        return self.values[-1] * (self.r_max / r) * np.exp(-self.meson_mass * (r - self.r_max))

    def __call__(self, r):
        return self.value(r)

    def evaluate(self, points):
        points = np.atleast_2d(points)
        return self.value(np.linalg.norm(points, axis=1))

    def gradient(self, points):
        """(n, 3) gradient; chi'(r)/r is smooth in r^2 inside the grid."""
        points = np.atleast_2d(points)
        r = np.linalg.norm(points, axis=1)
        over_r = np.where(
            r <= self.r_max,
            self.interpolant.odd(r * r),
            self.slope(r) / np.maximum(r, self.r_max),
        )
        return over_r[:, None] * points

    def operator_residual(self) -> float:
        """
        max |-chi'' - 2 chi'/r + M^2 chi - prefactor f| over interior grid points,
        with chi'' from central differences of the analytic chi'. Relative to max |prefactor f|.
        """
        grid = self.grid
        dx = grid[1] - grid[0]
        r = grid[3:-3]
        second = _fd_derivative(self.derivative, dx)
        lhs = -second - 2.0 * self.derivative[3:-3] / r + self.meson_mass ** 2 * self.values[3:-3]
        rhs = self.prefactor * self.source[3:-3]
        scale = float(np.max(np.abs(self.prefactor * self.source))) or 1.0
        return float(np.max(np.abs(lhs - rhs)) / scale)


def exponential_moments(source, grid, meson_mass, power=1, order=PANEL_ORDER):
    """
    A(r) = int_0^r e^{-M(r-s)} s^power f(s) ds and B(r) = int_r^inf e^{-M(s-r)} s^power f(s) ds
    on the grid, accumulated interval by interval so no factor e^{+M r} is formed.
    """
    grid = np.asarray(grid, dtype=float)
    fn = _source_function(source, grid)
    nodes, weights = _interval_nodes(grid, order)
    weighted = weights * nodes ** power * fn(nodes)
    M = float(meson_mass)
    piece_a = np.sum(weighted * np.exp(-M * (grid[1:, None] - nodes)), axis=1)
    piece_b = np.sum(weighted * np.exp(-M * (nodes - grid[:-1, None])), axis=1)
    step = np.exp(-M * np.diff(grid))
    a = np.zeros_like(grid)
    b = np.zeros_like(grid)
    for i in range(len(grid) - 1):
        a[i + 1] = step[i] * a[i] + piece_a[i]
    for i in range(len(grid) - 2, -1, -1):
        b[i] = step[i] * b[i + 1] + piece_b[i]
    return a, b


def yukawa_radial(source, meson_mass, grid, convention="yukawa", order=PANEL_ORDER) -> ScalarFieldRadial:
    """
    chi(r) = (1/(2 M r)) int_0^inf s f(s) [e^{-M|r-s|} - e^{-M(r+s)}] ds, or the
    Coulomb form (1/r) int_0^r s^2 f + int_r^inf s f when M = 0.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"Unknown kernel convention: {convention}")
    if meson_mass < 0:
        raise ValueError("Meson mass must be non-negative.")
    if convention == "gaussian" and meson_mass != 0:
        raise ValueError("The gaussian convention is the M = 0 Coulomb kernel.")
    grid = np.asarray(grid, dtype=float)
    fn = _source_function(source, grid)
    on_grid = np.asarray(fn(grid), dtype=float)
    peak = float(np.max(np.abs(on_grid)))
    if peak > 0 and abs(on_grid[-1]) > DECAY_GATE * peak:
        raise ToleranceError("source does not decay inside the radial grid", abs(on_grid[-1]) / peak, DECAY_GATE)

    M = float(meson_mass)
    r = grid
    values = np.empty_like(r)
    derivative = np.zeros_like(r)
    if M == 0.0:
        nodes, weights = _interval_nodes(grid, order)
        sf = weights * nodes * fn(nodes)
        inner, _ = _inner_outer(np.sum(sf * nodes, axis=1))
        _, tail = _inner_outer(np.sum(sf, axis=1))
        values[1:] = inner[1:] / r[1:] + tail[1:]
        values[0] = tail[0]
        derivative[1:] = -inner[1:] / r[1:] ** 2
    else:
        a, b = exponential_moments(fn, grid, M, 1, order)
        k0 = b[0]
        decay = np.exp(-M * r)
        values[1:] = (a[1:] + b[1:] - decay[1:] * k0) / (2.0 * M * r[1:])
        values[0] = k0
        derivative[1:] = (b[1:] - a[1:] + decay[1:] * k0) / (2.0 * r[1:]) - values[1:] / r[1:]

    factor = 4.0 * math.pi if convention == "gaussian" else 1.0
    field = ScalarFieldRadial(grid, factor * values, factor * derivative, on_grid, M, convention)
    logging.debug(f"Radial {convention} potential with M={M}: chi(0)={field.values[0]:.10g}")
    return field


class ScalarPotential:
    """
    Axisymmetric Coulomb potential Phi(x) = sum_l Phi_l(r) P_l(cos theta) of a
    density, in the 1/|x| kernel convention (-Laplacian Phi = 4 pi rho).
    """

    def __init__(self, grid, multipoles, derivatives, inner_moments, density_multipoles):
        self.grid = np.asarray(grid, dtype=float)
        self.r_max = float(self.grid[-1])
        self.multipoles = [np.asarray(m) for m in multipoles]
        self.derivatives = [np.asarray(d) for d in derivatives]
        self.inner_moments = list(inner_moments)
        self.density_multipoles = [np.asarray(d) for d in density_multipoles]
        self._splines = [make_interp_spline(self.grid, m, k=5) for m in self.multipoles]
        self._dsplines = [make_interp_spline(self.grid, d, k=5) for d in self.derivatives]
        self._rho = [make_interp_spline(self.grid, d, k=5) for d in self.density_multipoles]

    @property
    def lmax(self) -> int:
        return len(self.multipoles) - 1

    @property
    def monopole_charge(self) -> float:
        """int rho d^3x: Phi_0 = Q / r outside the grid."""
        return 4.0 * math.pi * self.inner_moments[0]

    def radial(self, ell, r):
        r = np.asarray(r, dtype=float)
        outside = (4.0 * math.pi / (2 * ell + 1)) * self.inner_moments[ell] / np.maximum(r, self.r_max) ** (ell + 1)
        return np.where(r <= self.r_max, self._splines[ell](np.minimum(r, self.r_max)), outside)

    def radial_slope(self, ell, r):
        r = np.asarray(r, dtype=float)
        outside = -(ell + 1) * self.radial(ell, r) / np.maximum(r, self.r_max)
        return np.where(r <= self.r_max, self._dsplines[ell](np.minimum(r, self.r_max)), outside)

    def density(self, ell, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.r_max, self._rho[ell](np.minimum(r, self.r_max)), 0.0)

    @staticmethod
    def _polar(points):
        points = np.atleast_2d(points)
        r = np.linalg.norm(points, axis=1)
        safe = np.maximum(r, 1e-300)
        mu = np.where(r > 0, points[:, 2] / safe, 0.0)
        return points, r, safe, mu

    def evaluate(self, points):
        _, r, _, mu = self._polar(points)
        return sum(self.radial(ell, r) * eval_legendre(ell, mu) for ell in range(self.lmax + 1))

    def gradient(self, points):
        points, r, safe, mu = self._polar(points)
        unit = points / safe[:, None]
        polar = (np.array([0.0, 0.0, 1.0])[None, :] - mu[:, None] * unit) / safe[:, None]
        polar[r == 0] = 0.0
        total = np.zeros_like(points)
        for ell in range(self.lmax + 1):
            legendre = eval_legendre(ell, mu)
            total += (self.radial_slope(ell, r) * legendre)[:, None] * unit
            if ell:
                dleg = npleg.legval(mu, npleg.legder([0] * ell + [1]))
                total += (self.radial(ell, r) * dleg)[:, None] * polar
        return total


class VectorPotential:
    """
    Azimuthal vector potential A(x) = b(r) (-x2, x1, 0), the sin(theta) harmonic
    of -Laplacian A = 4 pi J for an azimuthal current.
    """

    def __init__(self, grid, b_values, inner_moment, current_profile):
        self.grid = np.asarray(grid, dtype=float)
        self.r_max = float(self.grid[-1])
        self.b_values = np.asarray(b_values, dtype=float)
        self.inner_moment = float(inner_moment)
        self.current_profile = np.asarray(current_profile, dtype=float)
        s = self.grid ** 2
        self._b = make_interp_spline(s, self.b_values, k=5)
        self._b_ds = self._b.derivative()
        self._j = make_interp_spline(self.grid, self.current_profile, k=5)

    @property
    def dipole(self) -> float:
        """c of the exterior form b = c / r^3."""
        return 4.0 * math.pi / 3.0 * self.inner_moment

    def b(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.r_max, self._b(np.minimum(r * r, self.r_max ** 2)),
                        self.dipole / np.maximum(r, self.r_max) ** 3)

    def b_ds(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.r_max, self._b_ds(np.minimum(r * r, self.r_max ** 2)),
                        -1.5 * self.dipole / np.maximum(r, self.r_max) ** 5)

    def b_slope(self, r):
        return 2.0 * np.asarray(r, dtype=float) * self.b_ds(r)

    def current(self, r):
        """Radial weight j(r) = (3/4) int J_phi sin(theta) d(cos theta)."""
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.r_max, self._j(np.minimum(r, self.r_max)), 0.0)

    def evaluate(self, points):
        points = np.atleast_2d(points)
        b = self.b(np.linalg.norm(points, axis=1))
        return b[:, None] * np.stack([-points[:, 1], points[:, 0], np.zeros(len(points))], axis=1)

    def jacobian(self, points):
        """(n, 3, 3) array with [i, j] = d_j A_i."""
        points = np.atleast_2d(points)
        r = np.linalg.norm(points, axis=1)
        b, b_ds = self.b(r), self.b_ds(r)
        jac = np.zeros((len(points), 3, 3))
        jac[:, 0, :] = -2.0 * b_ds[:, None] * points * points[:, 1, None]
        jac[:, 1, :] = 2.0 * b_ds[:, None] * points * points[:, 0, None]
        jac[:, 0, 1] -= b
        jac[:, 1, 0] += b
        return jac

    def divergence(self, points):
        return np.trace(self.jacobian(points), axis1=1, axis2=2)

    def curl(self, points):
        jac = self.jacobian(points)
        return np.stack([
            jac[:, 2, 1] - jac[:, 1, 2],
            jac[:, 0, 2] - jac[:, 2, 0],
            jac[:, 1, 0] - jac[:, 0, 1],
        ], axis=1)


class MdPotentials(NamedTuple):
    scalar: ScalarPotential
    vector: VectorPotential
    field: Optional[SpinorField]


def _meridian(r_nodes, mu_nodes):
    """Points (r sin theta, 0, r cos theta) for every radial and angular node."""
    sin = np.sqrt(1.0 - mu_nodes ** 2)
    r = r_nodes.reshape(-1, 1)
    return np.stack([r * sin, np.zeros_like(r * sin), r * mu_nodes], axis=-1).reshape(-1, 3)


def _angular_rule(order=ANGULAR_ORDER):
    return panel_rule([-1.0, 1.0], order)


def coulomb_multipoles(density: Callable[[np.ndarray], np.ndarray], grid, lmax=4, order=PANEL_ORDER) -> ScalarPotential:
    """
    Legendre-expand an axisymmetric density up to lmax and solve each radial
    Coulomb problem:
      Phi_l(r) = 4 pi/(2l+1) [r^{-l-1} int_0^r s^{l+2} rho_l + r^l int_r^inf s^{1-l} rho_l]
    """
    grid = np.asarray(grid, dtype=float)
    r_nodes, r_weights = _interval_nodes(grid, order)
    mu, mu_w = _angular_rule()
    rho = density(_meridian(r_nodes, mu)).reshape(r_nodes.size, len(mu))
    grid_rho = density(_meridian(grid, mu)).reshape(len(grid), len(mu))

    multipoles, derivatives, moments, densities = [], [], [], []
    r = grid
    safe = np.where(r > 0, r, 1.0)
    for ell in range(lmax + 1):
        project = 0.5 * (2 * ell + 1) * mu_w * eval_legendre(ell, mu)
        rho_l = (rho @ project).reshape(r_nodes.shape)
        inner, _ = _inner_outer(np.sum(r_weights * r_nodes ** (ell + 2) * rho_l, axis=1))
        _, outer = _inner_outer(np.sum(r_weights * r_nodes ** (1 - ell) * rho_l, axis=1))
        factor = 4.0 * math.pi / (2 * ell + 1)
        phi = factor * (inner / safe ** (ell + 1) + safe ** ell * outer)
        dphi = factor * (-(ell + 1) * inner / safe ** (ell + 2) + ell * safe ** (ell - 1) * outer)
        phi[0] = factor * outer[0] if ell == 0 else 0.0
        dphi[0] = factor * outer[0] if ell == 1 else 0.0
        multipoles.append(phi)
        derivatives.append(dphi)
        moments.append(float(inner[-1]))
        densities.append(grid_rho @ project)
    logging.debug(f"Coulomb multipoles up to l={lmax}: monopole charge {4 * math.pi * moments[0]:.10g}")
    return ScalarPotential(grid, multipoles, derivatives, moments, densities)


def azimuthal_vector_potential(current_phi: Callable[[np.ndarray], np.ndarray], grid, order=PANEL_ORDER) -> VectorPotential:
    """
    Vector potential of an azimuthal current J = J_phi e_phi through its sin(theta)
    harmonic j(r) = (3/4) int J_phi sin(theta) d(cos theta):
      a(r) = 4 pi/3 [r^{-2} int_0^r s^3 j + r int_r^inf j],  b = a / r.
    """
    grid = np.asarray(grid, dtype=float)
    r_nodes, r_weights = _interval_nodes(grid, order)
    mu, mu_w = _angular_rule()
    sin = np.sqrt(1.0 - mu ** 2)
    j_nodes = (current_phi(_meridian(r_nodes, mu)).reshape(r_nodes.size, len(mu)) @ (0.75 * mu_w * sin))
    j_nodes = j_nodes.reshape(r_nodes.shape)
    j_grid = current_phi(_meridian(grid, mu)).reshape(len(grid), len(mu)) @ (0.75 * mu_w * sin)
    inner, _ = _inner_outer(np.sum(r_weights * r_nodes ** 3 * j_nodes, axis=1))
    _, outer = _inner_outer(np.sum(r_weights * j_nodes, axis=1))
    safe = np.where(grid > 0, grid, 1.0)
    b = 4.0 * math.pi / 3.0 * (inner / safe ** 3 + outer)
    b[0] = 4.0 * math.pi / 3.0 * outer[0]
    return VectorPotential(grid, b, inner[-1], j_grid)


def md_potentials(field: SpinorField, lmax=4, grid=None) -> MdPotentials:
    """
    Static potentials of a standing field: Phi0 from rho0 = |phi|^2 by Legendre
    multipoles, A0 from the azimuthal current phi* alpha phi.
    """
    if not isinstance(field, FamilyField):
        raise ValueError("MD potentials need a family field with an azimuthal current.")
    grid = field.profile.grid if grid is None else np.asarray(grid, dtype=float)

    def density(points):
        return np.sum(np.abs(field.evaluate(points)) ** 2, axis=1)

    def azimuthal_current(points):
        # e_phi = e_2 on the meridian x2 = 0
        return current_density(field, points).current[:, 1]

    scalar = coulomb_multipoles(density, grid, lmax)
    vector = azimuthal_vector_potential(azimuthal_current, grid)
    logging.info(f"MD potentials for family {field.family}: charge {scalar.monopole_charge:.10g}, "
                 f"dipole {vector.dipole:.6g}")
    return MdPotentials(scalar, vector, field)


def _reduced_field_energies(potentials: MdPotentials, spec: QuadratureSpec):
    """Radial integrals for T and T_j plus the analytic exterior contributions."""
    scalar, vector = potentials.scalar, potentials.vector
    r, w = radial_rule(scalar.grid, spec)
    r2 = r * r
    rho_phi = sum(
        4.0 * math.pi / (2 * ell + 1) * math.fsum(w * scalar.density(ell, r) * scalar.radial(ell, r) * r2)
        for ell in range(scalar.lmax + 1)
    )
    b = vector.b(r)
    a = b * r
    current_a = 8.0 * math.pi / 3.0 * math.fsum(w * vector.current(r) * a * r2)

    phi_slope = scalar.radial_slope(0, r)
    b_slope = vector.b_slope(r)
    big_r = scalar.r_max
    charge = scalar.monopole_charge
    dipole = vector.dipole
    phi_part = math.fsum(w * phi_slope ** 2 * r2) / 3.0 + charge ** 2 / (3.0 * big_r)
    axial = 2.0 / 15.0 * math.fsum(w * b_slope ** 2 * r2 * r2) + 0.4 * dipole ** 2 / big_r ** 3
    transverse = math.fsum(w * r2 * (4.0 / 15.0 * b_slope ** 2 * r2 + b ** 2 + 2.0 / 3.0 * b * b_slope * r))
    transverse += 7.0 / 15.0 * dipole ** 2 / big_r ** 3
    return {
        "rho_Phi": rho_phi,
        "J_A": current_a,
        "T": rho_phi - current_a,
        "T1": phi_part - transverse,
        "T2": phi_part - transverse,
        "T3": phi_part - axial,
    }


def _reciprocity_integrand(potentials: MdPotentials):
    field = potentials.field

    def integrand(points):
        phi = field.evaluate(points)
        rho = np.sum(np.abs(phi) ** 2, axis=1)
        current = current_density(field, points).current
        scalar = potentials.scalar.evaluate(points)
        vector = potentials.vector.evaluate(points)
        out = {"scale": np.linalg.norm(current, axis=1) * np.abs(scalar) + rho * np.linalg.norm(vector, axis=1)}
        for k in range(3):
            out[f"JPhi{k + 1}"] = current[:, k] * scalar
            out[f"rhoA{k + 1}"] = rho * vector[:, k]
        return out

    return integrand


def gauge_residual(potentials: MdPotentials, points=None, step=FD_STEP) -> float:
    """max |div A0| by central differences, relative to max |A0| per decay length."""
    vector = potentials.vector
    if points is None:
        points = sample_points(potentials.field)
    points = np.atleast_2d(points)
    div = np.zeros(len(points))
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        div += (vector.evaluate(points + e)[:, j] - vector.evaluate(points - e)[:, j]) / (2.0 * step)
    scale = np.max(np.linalg.norm(vector.evaluate(points), axis=1)) / potentials.field.decay_length
    return float(np.max(np.abs(div)) / scale) if scale else 0.0


def md_functionals(field: FamilyField, potentials: MdPotentials, spec: QuadratureSpec = None, omega=None,
                   tolerance=1e-5, direct=True) -> FunctionalReport:
    """
    T = int (rho Phi - J.A), T_j = (1/4 pi) int (|d_j Phi|^2 - |d_j A|^2) and
    m0 = m int psi-bar psi, with the identities that hold for any field
    (sum T_j = T, T1 = T2, gauge, reciprocity) asserted and the relations that
    need a self-consistent solution reported only.
    """
    spec = spec or QuadratureSpec()
    omega = field.omega if omega is None else omega
    energies = _reduced_field_energies(potentials, spec)
    radial = reduced_integrals(field.profile, spec=spec)
    m0 = field.profile.mass * radial["scalar"]
    q, sum_i = radial["rho"], radial["kinetic"]

    report = FunctionalReport("md_functionals", context={"family": field.family, "omega": omega})
    report.values.update(energies)
    report.values.update({"m0": m0, "Q": q, "sum_I": sum_i})
    t = energies["T"]
    sum_t = energies["T1"] + energies["T2"] + energies["T3"]
    report.add("field_energy_split", "T1 + T2 + T3 = T", sum_t, t, tolerance)
    report.add("transverse_symmetry", "T1 = T2", energies["T1"], energies["T2"], tolerance, t)
    report.add("gauge", "div A0 = 0", 0.0, 0.0, 1e-6, residual=gauge_residual(potentials))

    if direct:
        def make_grid(s):
            return contracted_box(np.zeros(3), [0.0, 0.0, 1.0], field.decay_length, 1.0, s)

        totals = gated_integrate(_reciprocity_integrand(potentials), make_grid, spec, scale_keys=["scale"])
        scale = totals.pop("scale").real
        gap = max(abs(totals[f"JPhi{k}"] - totals[f"rhoA{k}"]) for k in range(1, 4))
        for k in range(1, 4):
            report.values[f"JPhi{k}"] = totals[f"JPhi{k}"].real
            report.values[f"rhoA{k}"] = totals[f"rhoA{k}"].real
        report.add("reciprocity", "int J0 Phi0 = int rho0 A0", gap, 0.0, 1e-6, residual=gap / scale if scale else 0.0)

    report.add("md_charge_relation", "omega Q - m0 = T/2", omega * q - m0, t / 2.0, tolerance, asserted=False)
    report.add("md_kinetic_relation", "sum I = -T/2", sum_i, -t / 2.0, tolerance, asserted=False)
    report.add("md_virial", "sum I = (3/2)(omega Q - m0) - (5/4) T", sum_i,
               1.5 * (omega * q - m0) - 1.25 * t, tolerance, asserted=False)
    for j in range(1, 4):
        report.add(f"md_component_{j}", f"I_{j} = -T/2 + T_{j}", sum_i / 3.0, -t / 2.0 + energies[f"T{j}"],
                   tolerance, asserted=False)
    logging.info(f"MD functionals: T={t:.10g}, sum T_j={sum_t:.10g}, m0={m0:.10g}")
    return report


class BoostedFields(NamedTuple):
    E: np.ndarray
    H: np.ndarray
    Phi: np.ndarray
    A: np.ndarray
    J: np.ndarray


def _rest_fields(potentials: MdPotentials, y):
    e0 = -potentials.scalar.gradient(y)
    h0 = potentials.vector.curl(y)
    return e0, h0


def md_boost_fields(potentials: MdPotentials, frame: BoostFrame, t, x) -> BoostedFields:
    """
    Lab-frame fields of the moving configuration at (t, x):
      (Phi_v, A_v) = Lambda_v (Phi0, A0)(y),  J_v = Lambda_v j0(y)
      E_v = gamma E0 - kappa v (v.E0) - gamma v x H0
      H_v = gamma H0 - kappa v (v.H0) + gamma v x E0
    """
    if frame.dim != 3:
        raise ValueError("MD boosts need a 3D frame.")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = x @ frame.contraction().T - frame.gamma * t * frame.v
    v, gamma, kappa = frame.v, frame.gamma, frame.kappa
    four_potential = np.column_stack([potentials.scalar.evaluate(y), potentials.vector.evaluate(y)]) @ frame.lam.T

    e0, h0 = _rest_fields(potentials, y)
    e_v = gamma * e0 - kappa * np.outer(e0 @ v, v) - gamma * np.cross(v, h0)
    h_v = gamma * h0 - kappa * np.outer(h0 @ v, v) + gamma * np.cross(v, e0)

    current = np.full((len(x), 4), np.nan)
    if potentials.field is not None:
        rest = current_density(potentials.field, y)
        current = np.column_stack([rest.rho, rest.current]) @ frame.lam.T
    return BoostedFields(e_v, h_v, four_potential[:, 0], four_potential[:, 1:], current)


def md_boost_residuals(potentials: MdPotentials, frame: BoostFrame, t, x, step=FD_STEP) -> FunctionalReport:
    """
    Finite-difference oracles for the boosted fields: E_v = -dA_v/dt - grad Phi_v,
    H_v = curl A_v and the Lorentz gauge dPhi_v/dt + div A_v = 0.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    fields = md_boost_fields(potentials, frame, t, x)

    def at(tt, xx):
        return md_boost_fields(potentials, frame, tt, xx)

    later, earlier = at(t + step, x), at(t - step, x)
    dphi_dt = (later.Phi - earlier.Phi) / (2.0 * step)
    da_dt = (later.A - earlier.A) / (2.0 * step)
    jac = np.zeros((len(x), 3, 3))
    grad_phi = np.zeros((len(x), 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        plus, minus = at(t, x + e), at(t, x - e)
        grad_phi[:, j] = (plus.Phi - minus.Phi) / (2.0 * step)
        jac[:, :, j] = (plus.A - minus.A) / (2.0 * step)
    curl = np.stack([jac[:, 2, 1] - jac[:, 1, 2], jac[:, 0, 2] - jac[:, 2, 0], jac[:, 1, 0] - jac[:, 0, 1]], axis=1)
    divergence = np.trace(jac, axis1=1, axis2=2)

    scale = max(float(np.max(np.abs(fields.E))), float(np.max(np.abs(fields.H))), 1e-300)
    report = FunctionalReport("md_boost_residuals", context={"v": frame.v.tolist(), "t": t})
    tol = 1e-4
    report.add("electric_field", "E_v = -dA_v/dt - grad Phi_v", 0.0, 0.0, tol,
               residual=float(np.max(np.abs(fields.E + da_dt + grad_phi))) / scale)
    report.add("magnetic_field", "H_v = curl A_v", 0.0, 0.0, tol,
               residual=float(np.max(np.abs(fields.H - curl))) / scale)
    report.add("lorentz_gauge", "dPhi_v/dt + div A_v = 0", 0.0, 0.0, tol,
               residual=float(np.max(np.abs(dphi_dt + divergence))) / scale)
    if potentials.field is not None:
        psi = moving_wave(potentials.field, frame).evaluate(t, x)
        moving = four_current(psi, 3)
        report.add("current_transformation", "j_v = Lambda_v j0(y)", 0.0, 0.0, 1e-10,
                   residual=float(np.max(np.abs(moving - fields.J)) / max(np.max(moving[:, 0]), 1e-300)))
    return report
