# quadrature.py

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.special import roots_legendre

from config import THREADS
from errors import QuadratureError

# Panel edges for one half-axis, in units of the decay length 1/kappa.
DEFAULT_BREAKS = (0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0)


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    if order < 2:
        raise ValueError("At least 2 nodes are required for Gauss-Legendre quadrature.")
    nodes, weights = roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(edges: Sequence[float], order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive panels [edges[i], edges[i+1]]."""
    base_x, base_w = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * base_x).ravel()
    weights = (half * base_w).ravel()
    return nodes, weights


def symmetric_rule(length: float, breaks: Sequence[float], order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Mirror the half-axis panels breaks*length to cover [-L, L]."""
    half = np.asarray(breaks, dtype=float) * length
    edges = np.concatenate([-half[:0:-1], half])
    return panel_rule(edges, order)


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Quadrature settings shared by the reduced radial and the direct box paths.

    breaks       half-axis panel edges in decay lengths (last entry is the truncation)
    order        Gauss-Legendre nodes per box panel
    radial_panel grid intervals per radial panel
    radial_order Gauss-Legendre nodes per radial panel
    tol          relative tolerance of the refinement gate
    gate         run the refinement gate on direct box integrals
    """

    breaks: Tuple[float, ...] = DEFAULT_BREAKS
    order: int = 8
    radial_panel: int = 4
    radial_order: int = 8
    tol: float = 1e-6
    gate: bool = False
    chunk_points: int = 200_000
    threads: int = THREADS

    def refined(self) -> "QuadratureSpec":
        return replace(self, order=self.order + 4, radial_order=self.radial_order + 4)


def radial_rule(grid: np.ndarray, spec: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Panels of `radial_panel` grid intervals over [0, grid[-1]]."""
    edges = grid[:: spec.radial_panel]
    if edges[-1] != grid[-1]:
        edges = np.append(edges, grid[-1])
    return panel_rule(edges, spec.radial_order)


def radial_integral(values_fn: Callable[[np.ndarray], np.ndarray], grid, spec: QuadratureSpec, weight_power=2) -> float:
    """int_0^R values(r) r^weight_power dr."""
    r, w = radial_rule(np.asarray(grid), spec)
    return float(np.sum(w * values_fn(r) * r ** weight_power))


@dataclass(frozen=True)
class BoxGrid:
    """
    Tensor grid x = center + sum_a s_a axes[a] with per-axis rules (nodes s_a, weights w_a).
    `axes` is an orthonormal frame (rows), so the Jacobian is 1.
    """

    center: np.ndarray
    axes: np.ndarray
    rules: Tuple[Tuple[np.ndarray, np.ndarray], ...]

    @property
    def dim(self) -> int:
        return len(self.rules)

    @property
    def size(self) -> int:
        return int(np.prod([len(n) for n, _ in self.rules]))


def orthonormal_frame(direction) -> np.ndarray:
    """Rows (d, e1, e2) with d along `direction` (x3 when direction vanishes)."""
    direction = np.asarray(direction, dtype=float)
    if direction.shape[0] == 1:
        return np.eye(1)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        return np.eye(3)[[2, 0, 1]]
    d = direction / norm
    helper = np.array([0.0, 0.0, 1.0]) if abs(d[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(helper, d)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return np.vstack([d, e1, e2])


def contracted_box(center, direction, length, contraction, spec: QuadratureSpec, dim=3) -> BoxGrid:
    """
    Box of half-width length*breaks[-1] across `direction` and that divided by
    `contraction` along it, centered at `center`.
    """
    axes = orthonormal_frame(direction if dim == 3 else [1.0])
    along = symmetric_rule(length / contraction, spec.breaks, spec.order)
    across = symmetric_rule(length, spec.breaks, spec.order)
    rules = (along,) + (across,) * (dim - 1)
    return BoxGrid(np.asarray(center, dtype=float).reshape(dim), axes, rules)


def _chunk_sum(integrand, grid: BoxGrid, first_nodes, first_weights):
    rest_nodes = [n for n, _ in grid.rules[1:]]
    rest_weights = [w for _, w in grid.rules[1:]]
    if rest_nodes:
        mesh = np.meshgrid(first_nodes, *rest_nodes, indexing="ij")
        wmesh = np.meshgrid(first_weights, *rest_weights, indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=1)
        weights = np.prod([w.ravel() for w in wmesh], axis=0)
    else:
        coords = first_nodes[:, None]
        weights = first_weights
    points = grid.center + coords @ grid.axes
    values = integrand(points)
    return {key: complex(np.sum(weights * val)) for key, val in values.items()}


def box_integrate(integrand: Callable[[np.ndarray], Dict[str, np.ndarray]], grid: BoxGrid,
                  spec: QuadratureSpec) -> Dict[str, complex]:
    """
    Integrate every entry of integrand(points) over the box.

    Points are processed in slabs along the first axis; slab sums are reduced
    in a fixed order with fsum, so results do not depend on the thread count.
    """
    first_nodes, first_weights = grid.rules[0]
    per_slab = max(1, grid.size // len(first_nodes))
    slab = max(1, spec.chunk_points // per_slab)
    pieces = [slice(i, i + slab) for i in range(0, len(first_nodes), slab)]
    jobs = (delayed(_chunk_sum)(integrand, grid, first_nodes[p], first_weights[p]) for p in pieces)
    partials = Parallel(n_jobs=spec.threads, prefer="threads")(jobs)

    totals = {}
    for key in partials[0]:
        totals[key] = complex(
            math.fsum(p[key].real for p in partials),
            math.fsum(p[key].imag for p in partials),
        )
    logging.debug(f"Box integral over {grid.size} points in {len(pieces)} slabs")
    return totals


def gated_integrate(integrand, make_grid: Callable[[QuadratureSpec], BoxGrid], spec: QuadratureSpec,
                    scale_keys=None) -> Dict[str, complex]:
    """
    box_integrate at spec; when spec.gate is set, repeat on the refined spec and
    raise QuadratureError if any entry moves by more than tol relative to the
    largest magnitude among `scale_keys` (all keys by default).
    """
    coarse = box_integrate(integrand, make_grid(spec), spec)
    if not spec.gate:
        return coarse
    fine_spec = spec.refined()
    fine = box_integrate(integrand, make_grid(fine_spec), fine_spec)
    keys = scale_keys or list(fine)
    scale = max(abs(fine[k]) for k in keys) or 1.0
    for key, value in fine.items():
        if abs(value - coarse[key]) > spec.tol * scale:
            raise QuadratureError(f"entry {key}", coarse[key], value)
    return fine
