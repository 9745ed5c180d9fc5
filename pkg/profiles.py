# profiles.py

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import optimize
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, make_interp_spline

from config import GRID_POINTS, RTOL
from errors import NoBracketError, TailUnderflowError, ToleranceError

KINDS = ("dirac3d_plus", "dirac3d_minus", "dirac1d", "kgd3d")
NONLINEARITIES = ("soler_linear", "power", "none")

R_START = 1e-6
R_MAX_FACTOR = 12.0
MATCH_FRACTION = 1.0 / 3.0
SWEEP_POINTS = 40
SWEEP_RTOL = 1e-8
BISECT_TOL = 1e-12
BLOWUP = 4.0
MAX_REFINEMENTS = 2

# Seventh-order central first derivative (6th-order accurate).
_FD_WEIGHTS = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


@dataclass(frozen=True)
class NonlinearityModel:
    """
    Scalar self-interaction g(s) = lam * sign(s) |s|^p with G(s) = lam |s|^(p+1)/(p+1).

    kind 'soler_linear' is p = 1; kind 'none' is G = 0 (used by the KGD system).
    """

    kind: str = "soler_linear"
    lam: float = 1.0
    exponent: float = 1.0

    def __post_init__(self):
        if self.kind not in NONLINEARITIES:
            raise ValueError(f"Unknown nonlinearity kind: {self.kind}")
        if self.kind == "soler_linear" and self.exponent != 1.0:
            raise ValueError("soler_linear fixes the exponent to 1.")
        if self.kind != "none" and self.lam <= 0:
            raise ValueError("Coupling lambda must be positive.")
        if self.exponent < 1:
            raise ValueError("Exponent p must be >= 1.")

    @classmethod
    def soler(cls, lam=1.0):
        return cls("soler_linear", float(lam), 1.0)

    @classmethod
    def power(cls, lam, exponent):
        return cls("power", float(lam), float(exponent))

    @classmethod
    def zero(cls):
        return cls("none", 0.0, 1.0)

    @property
    def is_zero(self) -> bool:
        return self.kind == "none"

    @property
    def theta(self) -> float:
        return self.exponent + 1.0

    def g(self, s):
        s = np.asarray(s, dtype=float)
        if self.is_zero:
            return np.zeros_like(s)
        if self.exponent == 1.0:
            return self.lam * s
        return self.lam * np.sign(s) * np.abs(s) ** self.exponent

    def G(self, s):
        s = np.asarray(s, dtype=float)
        if self.is_zero:
            return np.zeros_like(s)
        return self.lam * np.abs(s) ** (self.exponent + 1.0) / (self.exponent + 1.0)

    def scalar_g(self) -> Callable[[float], float]:
        """Plain-float g for the ODE right-hand side."""
        lam, p = self.lam, self.exponent
        if self.is_zero:
            return lambda s: 0.0
        if p == 1.0:
            return lambda s: lam * s
        return lambda s: lam * math.copysign(abs(s) ** p, s)

    def satisfies_growth(self, theta=None, samples=None) -> bool:
        """g(s) s >= theta G(s) on s >= 0 (theta defaults to p + 1)."""
        theta = self.theta if theta is None else theta
        s = np.linspace(0.0, 4.0, 401) if samples is None else np.asarray(samples, dtype=float)
        return bool(np.all(self.g(s) * s - theta * self.G(s) >= -1e-14 * (1 + np.abs(s))))

    def describe(self) -> dict:
        return {"nonlinearity": self.kind, "lambda": self.lam, "exponent": self.exponent}


class RadialInterpolant:
    """
    Quintic splines of a radial pair in s = r^2.

    The even component E(r) and the odd component divided by r, O(r) = odd(r)/r,
    are both smooth functions of r^2, so fields built from them are smooth in
    Cartesian coordinates including the origin. Beyond the grid both vanish.
    """

    def __init__(self, grid, even, odd):
        grid = np.asarray(grid, dtype=float)
        s = grid ** 2
        odd_over_r = np.empty_like(grid)
        odd_over_r[1:] = np.asarray(odd, dtype=float)[1:] / grid[1:]
        odd_over_r[0] = _extrapolate_to_origin(s[1:4], odd_over_r[1:4])
        self.r_max = float(grid[-1])
        self.s_max = float(s[-1])
        self._even = make_interp_spline(s, np.asarray(even, dtype=float), k=5)
        self._odd = make_interp_spline(s, odd_over_r, k=5)
        self._even_ds = self._even.derivative()
        self._odd_ds = self._odd.derivative()

    def _eval(self, spline, s):
        s = np.asarray(s, dtype=float)
        out = spline(np.minimum(s, self.s_max))
        return np.where(s <= self.s_max, out, 0.0)

    def even(self, s):
        return self._eval(self._even, s)

    def even_ds(self, s):
        return self._eval(self._even_ds, s)

    def odd(self, s):
        return self._eval(self._odd, s)

    def odd_ds(self, s):
        return self._eval(self._odd_ds, s)


def _extrapolate_to_origin(nodes, values):
    """Lagrange extrapolation of values(nodes) to 0."""
    total = 0.0
    for j, (xj, yj) in enumerate(zip(nodes, values)):
        weight = 1.0
        for k, xk in enumerate(nodes):
            if k != j:
                weight *= (0.0 - xk) / (xj - xk)
        total += weight * yj
    return total


@dataclass(frozen=True, eq=False)
class RadialProfile:
    kind: str
    omega: float
    mass: float
    grid: np.ndarray
    u: np.ndarray
    v: np.ndarray
    chi: Optional[np.ndarray] = None
    decay: Optional[float] = None
    residual: Optional[float] = None
    model: NonlinearityModel = field(default_factory=NonlinearityModel)
    nodes: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"Unknown profile kind: {self.kind}")
        if not 0 < self.omega < self.mass:
            raise ValueError(f"Frequency must satisfy 0 < omega < mass (omega={self.omega}, mass={self.mass}).")
        n = len(self.grid)
        if len(self.u) != n or len(self.v) != n or (self.chi is not None and len(self.chi) != n):
            raise ValueError("Profile columns must have the length of the grid.")
        if n < 4 or self.grid[0] != 0.0 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("Profile grid must start at 0 and increase strictly.")
        if self.kind == "kgd3d" and self.chi is None:
            raise ValueError("kgd3d profiles carry a chi column.")

    @property
    def sign(self) -> int:
        return -1 if self.kind == "dirac3d_minus" else 1

    @property
    def dim(self) -> int:
        return 1 if self.kind == "dirac1d" else 3

    @property
    def r_max(self) -> float:
        return float(self.grid[-1])

    @property
    def even(self) -> np.ndarray:
        """Component finite at the origin (v on the plus branch, u on the minus branch)."""
        return self.u if self.sign < 0 else self.v

    @property
    def odd(self) -> np.ndarray:
        """Component vanishing at the origin."""
        return self.v if self.sign < 0 else self.u

    @property
    def kappa(self) -> float:
        return math.sqrt(self.mass ** 2 - self.omega ** 2)

    @cached_property
    def interpolant(self) -> RadialInterpolant:
        return RadialInterpolant(self.grid, self.even, self.odd)

    def shift_values(self) -> Optional[np.ndarray]:
        """eta * chi on the grid for KGD profiles."""
        if self.chi is None:
            return None
        return self.meta.get("eta", 0.0) * self.chi

    def with_components(self, **changes) -> "RadialProfile":
        return replace(self, **changes)

    def scaled(self, u=1.0, v=1.0, chi=1.0) -> "RadialProfile":
        return replace(
            self,
            u=self.u * u,
            v=self.v * v,
            chi=None if self.chi is None else self.chi * chi,
            residual=None,
        )

    def header(self) -> dict:
        head = {"kind": self.kind, "omega": self.omega, "mass": self.mass, "lambda": self.model.lam}
        head.update({"nonlinearity": self.model.kind, "exponent": self.model.exponent, "nodes": self.nodes})
        if self.decay is not None:
            head["decay"] = self.decay
        if self.residual is not None:
            head["residual"] = self.residual
        for key in ("eta", "meson_mass", "match_radius"):
            if key in self.meta:
                head[key] = self.meta[key]
        return head


class FastCubic:
    """Scalar cubic-spline evaluation on a uniform grid; zero beyond the last knot."""

    def __init__(self, grid, values):
        spline = CubicSpline(grid, values)
        self.values = np.asarray(values, dtype=float)
        self.grid = np.asarray(grid, dtype=float)
        self._dx = float(grid[1] - grid[0])
        self._end = float(grid[-1])
        self._last = len(grid) - 2
        self._coef = [tuple(col) for col in spline.c.T.tolist()]

    def __call__(self, r):
        if r >= self._end:
            return 0.0
        i = min(int(r / self._dx), self._last)
        t = r - i * self._dx
        c3, c2, c1, c0 = self._coef[i]
        return ((c3 * t + c2) * t + c1) * t + c0

    def scaled(self, factor) -> "FastCubic":
        clone = object.__new__(FastCubic)
        clone.__dict__.update(self.__dict__)
        clone.values = self.values * factor
        clone._coef = [tuple(factor * c for c in col) for col in self._coef]
        return clone


class _RadialSystem:
    """
    Radial first-order system in (f, h): f finite at 0, h vanishing at 0.

      h' + (d-1) h / r = f [g(s) + shift(r) - (m - sign*omega)]
      f'               = h [g(s) + shift(r) - (m + sign*omega)]

    with s = sign (f^2 - h^2). sign=+1 is (f, h) = (v, u); sign=-1 is (f, h) = (u, v).
    """

    def __init__(self, omega, mass, model, sign=1, dim=3, shift=None):
        self.omega, self.mass, self.model = omega, mass, model
        self.sign, self.dim = sign, dim
        self.a_f = mass + sign * omega
        self.a_h = mass - sign * omega
        self.kappa = math.sqrt(self.a_f * self.a_h)
        self.shift = shift
        self._g = model.scalar_g()

    def coefficients(self, r, f, h):
        c = self._g(self.sign * (f * f - h * h))
        if self.shift is not None:
            c += self.shift(r)
        return c - self.a_f, c - self.a_h

    def rhs(self, r, y):
        f, h = y
        c_f, c_h = self.coefficients(r, f, h)
        dh = f * c_h
        if self.dim > 1:
            dh -= (self.dim - 1) * h / r
        return [h * c_f, dh]

    def series(self, f0, r0):
        c_f, c_h = self.coefficients(0.0, f0, 0.0)
        slope = f0 * c_h / self.dim
        return np.array([f0 + slope * c_f * r0 * r0 / 2.0, slope * r0])

    def tail(self, r):
        """Decaying solution of the far-field linear system per unit amplitude."""
        decay = math.exp(-self.kappa * r)
        if self.dim == 1:
            return np.array([decay, self.kappa * decay / self.a_f])
        return np.array([decay / r, decay * (self.kappa * r + 1.0) / (self.a_f * r * r)])


class _AmplitudeShot:
    """Shooting parameter is f(0)."""

    label = "amplitude"

    def __init__(self, system):
        self.system = system

    def setup(self, p):
        return self.system, p


class _CouplingShot:
    """Shooting parameter scales the external shift at unit f(0); the system is linear in (f, h)."""

    label = "coupling"

    def __init__(self, omega, mass, model, sign, dim, base_shift):
        self._args = (omega, mass, model, sign, dim)
        self.base_shift = base_shift

    def setup(self, p):
        return _RadialSystem(*self._args, shift=self.base_shift.scaled(p)), 1.0


def _event(fn, terminal=False, direction=0):
    fn.terminal = terminal
    fn.direction = direction
    return fn


def count_nodes(system, f0, r_stop, rtol=SWEEP_RTOL) -> int:
    """
    Zeros of f before the trajectory escapes (|f| reaches a positive local minimum)
    or blows up. Overshooting the n-node state gives more than n zeros.
    """
    c_f, c_h = system.coefficients(0.0, f0, 0.0)
    if c_f * c_h > 0:
        return 0

    limit = BLOWUP * abs(f0)
    events = [
        _event(lambda r, y: y[0]),
        _event(lambda r, y: y[1]),
        _event(lambda r, y: abs(y[0]) + abs(y[1]) - limit, terminal=True, direction=1),
    ]
    sol = solve_ivp(
        system.rhs, (R_START, r_stop), system.series(f0, R_START), method="DOP853",
        rtol=rtol, atol=rtol * 1e-8 * abs(f0), events=events,
    )
    marks = [(r, "f", None) for r in sol.t_events[0]]
    marks += [(r, "h", y) for r, y in zip(sol.t_events[1], sol.y_events[1])]
    nodes = 0
    for r, which, y in sorted(marks, key=lambda m: m[0]):
        if which == "f":
            nodes += 1
            continue
        c_f, c_h = system.coefficients(r, y[0], y[1])
        if c_f * c_h > 0:
            break
    return nodes


def _bracket(shooter, nodes, sweep, r_stop):
    lo, hi = sweep
    trial = np.geomspace(lo, hi, SWEEP_POINTS)
    counts = [count_nodes(*shooter.setup(p), r_stop) for p in trial]
    logging.debug(f"Shooting sweep ({shooter.label}) counts: {counts}")
    brackets = [
        (float(a), float(b))
        for a, b, ca, cb in zip(trial[:-1], trial[1:], counts[:-1], counts[1:])
        if ca <= nodes < cb
    ]
    if not brackets:
        raise NoBracketError(f"no transition past {nodes} nodes in the {shooter.label} sweep", (lo, hi), counts)
    if len(brackets) > 1:
        logging.info(f"Found {len(brackets)} {shooter.label} brackets {brackets}; using the smallest as ground branch.")
    return brackets


def _bisect(shooter, nodes, bracket, r_stop, rtol):
    lo, hi = bracket
    steps = 0
    while hi - lo > BISECT_TOL * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if count_nodes(*shooter.setup(mid), r_stop, rtol=rtol) > nodes:
            hi = mid
        else:
            lo = mid
        steps += 1
    logging.debug(f"Bisection finished after {steps} steps at {lo!r}")
    return 0.5 * (lo + hi)


@dataclass
class _Segments:
    parameter: float
    amplitude: float
    f0: float
    system: _RadialSystem
    inner: object
    outer: object
    match_radius: float
    mismatch: float


def _integrate_segments(shooter, p, amplitude, r_match, r_max, max_step, rtol):
    system, f0 = shooter.setup(p)
    inner = solve_ivp(
        system.rhs, (R_START, r_match), system.series(f0, R_START), method="DOP853",
        rtol=rtol, atol=rtol * 1e-8 * abs(f0), max_step=max_step, dense_output=True,
    )
    start = amplitude * system.tail(r_max)
    outer = solve_ivp(
        system.rhs, (r_max, r_match), start, method="DOP853",
        rtol=rtol, atol=rtol * 1e-8 * (abs(start[0]) + abs(start[1])), max_step=max_step, dense_output=True,
    )
    return system, f0, inner, outer


def _match(shooter, p_guess, r_match, r_max, max_step, rtol):
    """
    Glue the outward shot to the inward tail at r_match by a two-unknown root
    solve in (shooting parameter, tail amplitude).
    """
    system, f0, inner, _ = _integrate_segments(shooter, p_guess, 1.0, r_match, r_max, max_step, rtol)
    y_in = inner.y[:, -1]
    scale = abs(y_in[0]) + abs(y_in[1])
    amp_guess = y_in[0] / system.tail(r_match)[0]

    def mismatch(x):
        _, _, a, b = _integrate_segments(shooter, p_guess * x[0], amp_guess * x[1], r_match, r_max, max_step, rtol)
        return (a.y[:, -1] - b.y[:, -1]) / scale

    result = optimize.root(mismatch, [1.0, 1.0], method="hybr", options={"xtol": 1e-15})
    x = result.x if np.all(np.isfinite(result.x)) else np.array([1.0, 1.0])
    if not result.success:
        logging.warning(f"Tail matching root solve reported: {result.message}")
    p, amp = p_guess * x[0], amp_guess * x[1]
    system, f0, inner, outer = _integrate_segments(shooter, p, amp, r_match, r_max, max_step, rtol)
    gap = float(np.max(np.abs(inner.y[:, -1] - outer.y[:, -1])) / scale)
    logging.debug(f"Matched at r={r_match:.4g}: parameter={p!r}, amplitude={amp!r}, gap={gap:.2e}")
    return _Segments(p, amp, f0, system, inner, outer, r_match, gap)


def _sample(segments, grid):
    f = np.empty_like(grid)
    h = np.empty_like(grid)
    f[0], h[0] = segments.f0, 0.0
    inside = (grid > 0) & (grid <= segments.match_radius)
    outside = grid > segments.match_radius
    f[inside], h[inside] = segments.inner.sol(grid[inside])
    f[outside], h[outside] = segments.outer.sol(grid[outside])
    return f, h


def _fd_derivative(values, dx):
    n = len(values)
    out = np.zeros(n - 6)
    for k, w in enumerate(_FD_WEIGHTS):
        if w:
            out += w * values[k:n - 6 + k]
    return out / dx


def _pair_residual(grid, f, h, omega, mass, model, sign, dim, shift_values=None):
    """Max over interior grid points of the ODE defect relative to |f| + |h|."""
    dx = grid[1] - grid[0]
    if not np.allclose(np.diff(grid), dx, rtol=1e-9, atol=0.0):
        raise ValueError("Residual certification expects a uniform grid.")
    r = grid[3:-3]
    fi, hi = f[3:-3], h[3:-3]
    c = model.g(sign * (fi * fi - hi * hi))
    if shift_values is not None:
        c = c + shift_values[3:-3]
    rhs_f = hi * (c - (mass + sign * omega))
    rhs_h = fi * (c - (mass - sign * omega))
    if dim > 1:
        rhs_h = rhs_h - (dim - 1) * hi / r
    defect = np.maximum(np.abs(_fd_derivative(f, dx) - rhs_f), np.abs(_fd_derivative(h, dx) - rhs_h))
    scale = np.abs(fi) + np.abs(hi)
    scale = np.where(scale > 0, scale, np.inf)
    return float(np.max(defect / scale))


def ode_residual(profile: RadialProfile, model: NonlinearityModel = None, shift_values=None) -> float:
    """
    Certify a profile against its signed radial system. KGD profiles use their
    own eta * chi column as the shift unless one is given.
    """
    model = profile.model if model is None else model
    if shift_values is None:
        shift_values = profile.shift_values()
    return _pair_residual(
        profile.grid, profile.even, profile.odd, profile.omega, profile.mass,
        model, profile.sign, profile.dim, shift_values,
    )


def _count_sign_changes(values):
    inner = values[1:]
    inner = inner[np.abs(inner) > 1e-13 * np.max(np.abs(values))]
    return int(np.count_nonzero(np.diff(np.sign(inner)) != 0))


def _default_r_max(omega, mass):
    return R_MAX_FACTOR / math.sqrt(mass * mass - omega * omega)


def _check_frequency(omega, mass):
    if mass <= 0:
        raise ValueError("Mass must be positive.")
    if not 0 < omega < mass:
        raise ValueError(f"Frequency must satisfy 0 < omega < mass (omega={omega}, mass={mass}).")


def _amplitude_sweep(system, model):
    floor = max(system.a_h, 1e-12)
    if system.shift is not None:
        floor *= 1e-6
    lo = 0.25 * (floor / model.lam) ** (0.5 / model.exponent)
    hi = (8.0 * system.mass / model.lam) ** (0.5 / model.exponent)
    return lo, hi


def shoot(shooter, *, nodes, sweep, grid, rtol, guess=None):
    """
    Locate (or reuse) a shooting parameter, then match the tail and sample on grid.

    Returns (segments, f, h, brackets).
    """
    r_max = float(grid[-1])
    r_stop = 1.5 * r_max
    brackets = []
    if guess is None:
        brackets = _bracket(shooter, nodes, sweep, r_stop)
        guess = _bisect(shooter, nodes, brackets[0], r_stop, rtol)
        logging.info(f"Shooting {shooter.label} located at {guess!r}")
    r_match = MATCH_FRACTION * r_max
    segments = _match(shooter, guess, r_match, r_max, float(grid[1] - grid[0]), rtol)
    f, h = _sample(segments, grid)
    return segments, f, h, brackets


def _solve_profile(kind, omega, mass, model, *, sign, dim, nodes, r_max, grid_points, rtol, residual_tol):
    _check_frequency(omega, mass)
    if model.is_zero:
        raise ValueError("Amplitude shooting needs a nonlinearity; G = 0 only enters through the KGD solver.")
    r_max = _default_r_max(omega, mass) if r_max is None else r_max
    system = _RadialSystem(omega, mass, model, sign, dim)
    sweep = _amplitude_sweep(system, model)

    residual = math.inf
    for attempt in range(MAX_REFINEMENTS + 1):
        grid = np.linspace(0.0, r_max, grid_points)
        segments, f, h, brackets = shoot(_AmplitudeShot(system), nodes=nodes, sweep=sweep, grid=grid, rtol=rtol)
        residual = _pair_residual(grid, f, h, omega, mass, model, sign, dim)
        logging.info(f"{kind} omega={omega}: attempt {attempt} residual {residual:.3e} on {grid_points} points")
        if residual <= residual_tol:
            break
        grid_points = 2 * grid_points - 1
        rtol = max(rtol / 10.0, 1e-14)
    else:
        raise ToleranceError(f"{kind} omega={omega} ODE residual", residual, residual_tol)

    u, v = (f, h) if sign < 0 else (h, f)
    profile = RadialProfile(
        kind=kind, omega=omega, mass=mass, grid=grid, u=u, v=v, residual=residual, model=model,
        nodes=_count_sign_changes(h),
        meta={
            "match_radius": segments.match_radius,
            "match_gap": segments.mismatch,
            "shoot_parameter": segments.parameter,
            "tail_amplitude": segments.amplitude,
            "brackets": brackets,
        },
    )
    if profile.nodes != nodes:
        logging.warning(f"Requested {nodes} nodes but the profile has {profile.nodes}.")
    fit = decay_rate(profile, prefactor=True)
    return replace(profile, decay=fit.kappa, meta={**profile.meta, "decay_fit_residual": fit.residual})


def solve_soler_radial(omega, mass, model: NonlinearityModel, sign=1, nodes=0, *,
                       r_max=None, grid_points=GRID_POINTS, rtol=RTOL, residual_tol=1e-8) -> RadialProfile:
    """
    Localized solution of the 3D radial system for the plus (sign=+1) or minus
    (sign=-1) family pair.

      plus:  u' + 2u/r = v[g(v^2-u^2) - (m-omega)],  v' = u[g(v^2-u^2) - (m+omega)],  u(0) = 0
      minus: v' + 2v/r = u[g(v^2-u^2) - (m+omega)],  u' = v[g(v^2-u^2) - (m-omega)],  v(0) = 0
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    kind = "dirac3d_plus" if sign > 0 else "dirac3d_minus"
    return _solve_profile(
        kind, omega, mass, model, sign=sign, dim=3, nodes=nodes,
        r_max=r_max, grid_points=grid_points, rtol=rtol, residual_tol=residual_tol,
    )


def solve_gross_neveu_1d(omega, mass, model: NonlinearityModel, *, x_max=None,
                         grid_points=GRID_POINTS, rtol=RTOL, residual_tol=1e-10) -> RadialProfile:
    """Half-line solution of u' = v[g - (m-omega)], v' = u[g - (m+omega)]; v even, u odd."""
    return _solve_profile(
        "dirac1d", omega, mass, model, sign=1, dim=1, nodes=0,
        r_max=x_max, grid_points=grid_points, rtol=rtol, residual_tol=residual_tol,
    )


class DecayFit(NamedTuple):
    kappa: float
    residual: float


def decay_rate(profile: RadialProfile, *, prefactor: bool = False) -> DecayFit:
    """
    Least-squares log-slope of |u| + |v| over the outer third of the grid.
    With prefactor=True the algebraic far-field factor r^((d-1)/2) is divided out first.
    """
    r = profile.grid
    window = r >= 2.0 * r[-1] / 3.0
    amplitude = np.abs(profile.u[window]) + np.abs(profile.v[window])
    tiny = amplitude < 1e-300
    if np.any(tiny):
        raise TailUnderflowError(r[window][np.argmax(tiny)])
    if prefactor:
        amplitude = amplitude * r[window] ** ((profile.dim - 1) / 2.0)
    y = np.log(amplitude)
    coeffs, residuals, *_ = np.polyfit(r[window], y, 1, full=True)
    rms = math.sqrt(float(residuals[0]) / window.sum()) if len(residuals) else 0.0
    return DecayFit(float(-coeffs[0]), rms)


def first_integral_1d(profile: RadialProfile) -> np.ndarray:
    """G(s) - m s + omega (v^2 + u^2) along the orbit; zero on localized solutions."""
    if profile.kind != "dirac1d":
        raise ValueError("The first integral exists for the 1D system only.")
    s = profile.v ** 2 - profile.u ** 2
    return profile.model.G(s) - profile.mass * s + profile.omega * (profile.v ** 2 + profile.u ** 2)


def closed_form_center_1d(omega, mass, model: NonlinearityModel) -> float:
    """v(0) of the localized 1D solution: v(0)^(2p) = (p+1)(m - omega)/lambda."""
    return ((model.exponent + 1.0) * (mass - omega) / model.lam) ** (0.5 / model.exponent)


def _rk4_leg(system, y, r_from, r_to, substeps):
    step = (r_to - r_from) / substeps
    r = r_from
    for _ in range(substeps):
        k1 = system.rhs(r, y)
        k2 = system.rhs(r + step / 2, [y[0] + step / 2 * k1[0], y[1] + step / 2 * k1[1]])
        k3 = system.rhs(r + step / 2, [y[0] + step / 2 * k2[0], y[1] + step / 2 * k2[1]])
        k4 = system.rhs(r + step, [y[0] + step * k3[0], y[1] + step * k3[1]])
        y = [
            y[0] + step / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + step / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        ]
        r += step
    return y


def rk4_crosscheck(profile: RadialProfile, substeps=2) -> float:
    """
    Re-integrate with fixed-step classical RK4 at `substeps` steps per grid
    interval: outward from the origin series to the matching radius, inward
    from the stored end point beyond it. Returns the sup-norm disagreement
    relative to f(0).
    """
    shift = None
    if profile.chi is not None:
        shift = FastCubic(profile.grid, profile.shift_values())
    system = _RadialSystem(profile.omega, profile.mass, profile.model, profile.sign, profile.dim, shift)
    grid, f, h = profile.grid, profile.even, profile.odd
    r_match = profile.meta.get("match_radius", MATCH_FRACTION * profile.r_max)
    split = int(np.searchsorted(grid, r_match, side="right"))

    worst = 0.0
    y = list(system.series(f[0], R_START))
    r_prev = R_START
    for i in range(1, split):
        y = _rk4_leg(system, y, r_prev, grid[i], substeps)
        r_prev = grid[i]
        worst = max(worst, abs(y[0] - f[i]), abs(y[1] - h[i]))

    y = [f[-1], h[-1]]
    for i in range(len(grid) - 2, split - 1, -1):
        y = _rk4_leg(system, y, grid[i + 1], grid[i], substeps)
        worst = max(worst, abs(y[0] - f[i]), abs(y[1] - h[i]))
    return worst / abs(f[0])
