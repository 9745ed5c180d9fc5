# clifford.py

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from errors import SuperluminalVelocityError

# Frames closer to the light cone than this are refused; gamma stays near 2.2e4.
SPEED_GUARD = 1.0 - 1e-9

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
I2 = np.eye(2, dtype=complex)
Z2 = np.zeros((2, 2), dtype=complex)


def _blocks(a, b, c, d):
    return np.block([[a, b], [c, d]])


@dataclass(frozen=True)
class DiracAlgebra:
    alpha: Tuple[np.ndarray, np.ndarray, np.ndarray]
    beta: np.ndarray
    alpha0: np.ndarray
    gamma5: np.ndarray
    pauli: Tuple[np.ndarray, np.ndarray, np.ndarray]
    spin: Tuple[np.ndarray, np.ndarray, np.ndarray]
    alpha1d: np.ndarray
    beta1d: np.ndarray

    def alpha_mu(self, mu):
        """alpha_0 = I followed by alpha_1..alpha_3."""
        return self.alpha0 if mu == 0 else self.alpha[mu - 1]


@lru_cache(maxsize=1)
def dirac_algebra() -> DiracAlgebra:
    """
    Pauli-Dirac matrices in the standard 2x2 block representation.

    alpha_k = [[0, s_k], [s_k, 0]], beta = diag(I, -I), gamma5 = -i a1 a2 a3.
    The 1D model uses alpha = -s_2, beta = s_3.
    """
    alpha = tuple(_blocks(Z2, s, s, Z2) for s in PAULI)
    beta = _blocks(I2, Z2, Z2, -I2)
    gamma5 = -1j * alpha[0] @ alpha[1] @ alpha[2]
    spin = tuple(_blocks(s, Z2, Z2, s) for s in PAULI)
    for m in alpha + (beta, gamma5) + spin:
        m.setflags(write=False)
    algebra = DiracAlgebra(
        alpha=alpha,
        beta=beta,
        alpha0=np.eye(4, dtype=complex),
        gamma5=gamma5,
        pauli=PAULI,
        spin=spin,
        alpha1d=-PAULI[1],
        beta1d=PAULI[2],
    )
    return algebra


def max_entry(matrix) -> float:
    """Residual norm used throughout: the largest absolute entry."""
    return float(np.max(np.abs(matrix))) if np.size(matrix) else 0.0


def anticommutator_table(algebra: DiracAlgebra = None):
    """
    Residuals of {A, B} = 2 delta_AB I over A, B in (alpha_1, alpha_2, alpha_3, beta),
    keyed by the pair of names. Hermiticity residuals are keyed by single names.
    """
    algebra = algebra or dirac_algebra()
    named = dict(zip(("alpha1", "alpha2", "alpha3", "beta"), algebra.alpha + (algebra.beta,)))
    eye = np.eye(4)
    table = {}
    for i, (na, a) in enumerate(named.items()):
        table[na] = max_entry(a - a.conj().T)
        for nb, b in list(named.items())[i:]:
            target = 2 * eye if na == nb else 0 * eye
            table[(na, nb)] = max_entry(a @ b + b @ a - target)
    for k, s in enumerate(algebra.pauli):
        for l, t in enumerate(algebra.pauli):
            table[(f"sigma{k + 1}", f"sigma{l + 1}")] = max_entry(s @ t + t @ s - 2 * (k == l) * I2)
    return table


@dataclass(frozen=True)
class BoostFrame:
    v: np.ndarray
    gamma: float
    lam: np.ndarray
    lam_inv: np.ndarray
    s: np.ndarray
    s_inv: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.v.shape[0])

    @property
    def speed(self) -> float:
        return float(np.sqrt(self.v @ self.v))

    @property
    def kappa(self) -> float:
        """(gamma - 1)/|v|^2, with the v = 0 limit contributing nothing."""
        v2 = float(self.v @ self.v)
        return 0.0 if v2 == 0.0 else (self.gamma - 1.0) / v2

    def contraction(self) -> np.ndarray:
        """Spatial block N = I + kappa v v^T of Lambda_v; y = N x - gamma v t."""
        return np.eye(self.dim) + self.kappa * np.outer(self.v, self.v)


def _as_velocity(v):
    vel = np.atleast_1d(np.asarray(v, dtype=float))
    if vel.ndim != 1 or vel.shape[0] not in (1, 3):
        raise ValueError(f"velocity must be a scalar or a 3-vector, got shape {vel.shape}")
    return vel


def _lorentz(vel, gamma, kappa):
    d = vel.shape[0]
    lam = np.empty((d + 1, d + 1))
    lam[0, 0] = gamma
    lam[0, 1:] = gamma * vel
    lam[1:, 0] = gamma * vel
    lam[1:, 1:] = np.eye(d) + kappa * np.outer(vel, vel)
    return lam


def _spinor_boost(vel, gamma, algebra):
    if vel.shape[0] == 1:
        alpha_v = vel[0] * algebra.alpha1d
        eye = np.eye(2, dtype=complex)
    else:
        alpha_v = sum(c * a for c, a in zip(vel, algebra.alpha))
        eye = np.eye(4, dtype=complex)
    return np.sqrt((gamma + 1.0) / 2.0) * (eye + alpha_v * (gamma / (gamma + 1.0)))


def boost_frame(v) -> BoostFrame:
    """
    Build the Lorentz boost Lambda_v and spinor boost S_v for velocity v.

    A scalar (or length-1) velocity builds the 1D frame with 2x2 matrices;
    a 3-vector builds the 4x4 frame. Raises SuperluminalVelocityError when
    |v| exceeds the guard just below 1.
    """
    vel = _as_velocity(v)
    speed = float(np.sqrt(vel @ vel))
    if not speed <= SPEED_GUARD:
        raise SuperluminalVelocityError(speed)

    v2 = speed * speed
    gamma = 1.0 / np.sqrt(1.0 - v2)
    kappa = 0.0 if v2 == 0.0 else (gamma - 1.0) / v2
    algebra = dirac_algebra()

    frame = BoostFrame(
        v=vel,
        gamma=float(gamma),
        lam=_lorentz(vel, gamma, kappa),
        lam_inv=_lorentz(-vel, gamma, kappa),
        s=_spinor_boost(vel, gamma, algebra),
        s_inv=_spinor_boost(-vel, gamma, algebra),
    )
    logging.debug(f"Boost frame built for v={vel.tolist()} (gamma={gamma:.12g})")
    return frame


def _alphas(frame: BoostFrame):
    algebra = dirac_algebra()
    if frame.dim == 1:
        return (np.eye(2, dtype=complex), algebra.alpha1d), algebra.beta1d
    return (algebra.alpha0,) + algebra.alpha, algebra.beta


def check_covariance(frame: BoostFrame) -> float:
    """
    max_mu |S* a_mu S - sum_nu Lambda_{mu nu} a_nu| plus |S* beta S - beta|.
    Works for 1D and 3D frames.
    """
    alphas, beta = _alphas(frame)
    s = frame.s
    worst = 0.0
    for mu, a_mu in enumerate(alphas):
        rhs = sum(frame.lam[mu, nu] * a_nu for nu, a_nu in enumerate(alphas))
        worst = max(worst, max_entry(s.conj().T @ a_mu @ s - rhs))
    return worst + max_entry(s.conj().T @ beta @ s - beta)


def identity_residuals(frame: BoostFrame) -> dict:
    """
    Residuals of the algebraic relations satisfied by a boost frame.

    Keys:
      lambda_det, lambda_inverse      det = 1 and Lambda_v Lambda_{-v} = I
      s_hermitian, s_inverse          S* = S and S_v S_{-v} = I
      s_squared                       S^2 = gamma (alpha.v + I)
      beta_invariance                 S* beta S = beta
      alpha_transform                 S* a_j S = a_j + gamma v_j I + v_j kappa alpha.v
      inverse_factorization           gamma (I - alpha.v) S = S^{-1}
      covariance                      check_covariance
    """
    alphas, beta = _alphas(frame)
    s, s_inv = frame.s, frame.s_inv
    eye = np.eye(s.shape[0])
    vel = frame.v
    alpha_v = sum(c * a for c, a in zip(vel, alphas[1:]))
    gamma, kappa = frame.gamma, frame.kappa

    alpha_transform = 0.0
    for j, a_j in enumerate(alphas[1:]):
        rhs = a_j + gamma * vel[j] * eye + vel[j] * kappa * alpha_v
        if frame.dim == 1:
            rhs = gamma * (vel[0] * eye + a_j)
        alpha_transform = max(alpha_transform, max_entry(s.conj().T @ a_j @ s - rhs))

    scale = max(1.0, max_entry(s) ** 2)
    return {
        "lambda_det": abs(np.linalg.det(frame.lam) - 1.0),
        "lambda_inverse": max_entry(frame.lam @ frame.lam_inv - np.eye(frame.lam.shape[0])),
        "s_hermitian": max_entry(s - s.conj().T),
        "s_inverse": max_entry(s @ s_inv - eye),
        "s_squared": max_entry(s @ s - gamma * (alpha_v + eye)) / scale,
        "beta_invariance": max_entry(s.conj().T @ beta @ s - beta) / scale,
        "alpha_transform": alpha_transform / scale,
        "inverse_factorization": max_entry(gamma * (eye - alpha_v) @ s - s_inv) / scale,
        "covariance": check_covariance(frame) / scale,
    }
