"""WMMSE surrogate of the weighted sum-rate.

For fixed receive coefficients ``beta`` and MSE weights ``omega`` the rate
surrogate is a concave quadratic in the stacked beamformer,

    -f_IE^H B9 f_IE + 2 Re{b3^H f_IE} + c2,

where B9 is block diagonal with the *same* N x N block on all K+G diagonal
positions. Only that block, the K non-zero segments of b3 and the scalar c2
are stored.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .model import Beamformer, SystemBudgets, sinr_all

__all__ = [
    "SurrogateState",
    "update_beta",
    "update_omega",
    "mse",
    "surrogate_value",
    "assemble_quadratics",
    "surrogate_state",
]


@dataclass
class SurrogateState:
    """Auxiliary variables plus the assembled quadratic coefficients.

    Attributes
    ----------
    beta, omega : ndarray, shape (K,)
        MMSE receive coefficients and MSE weights.
    scale : ndarray, shape (K,)
        Per-user factor ``weight_k / ln(rate_base)`` folded into every
        coefficient so the quadratic is in the same units as ``sum_rate``.
    a_block : ndarray, shape (N, N)
        Diagonal block of B9 (the blocks of B3 and B4 coincide).
    b_id : ndarray, shape (K, N)
        Per-user segments of b2; EH segments of b3 are zero.
    c2 : float
    e_block : ndarray, shape (N, N)
        Diagonal block of B10 (sum of EH channel outer products, without
        the harvesting efficiency).
    """

    beta: np.ndarray
    omega: np.ndarray
    scale: np.ndarray
    a_block: np.ndarray
    b_id: np.ndarray
    c2: float
    e_block: np.ndarray
    g: int

    @property
    def k(self) -> int:
        return self.b_id.shape[0]

    @property
    def n(self) -> int:
        return self.a_block.shape[0]

    @property
    def b3(self) -> np.ndarray:
        """b3 as a (K+G, N) matrix of per-beam segments."""
        return np.vstack([self.b_id, np.zeros((self.g, self.n), complex)])

    def objective(self, x: np.ndarray) -> float:
        """Minimization objective x^H B9 x - 2 Re{b3^H x} - c2 of the beam subproblem.

        ``x`` may be stacked (length N(K+G)) or a (K+G, N) matrix.
        """
        X = np.asarray(x).reshape(self.k + self.g, self.n)
        quad = np.real(np.sum(X.conj() * (X @ self.a_block.T)))
        lin = np.real(np.vdot(self.b_id, X[: self.k]))
        return float(quad - 2 * lin - self.c2)

    def value(self, x: np.ndarray) -> float:
        """The surrogate sum-rate at ``x`` (negated objective)."""
        return -self.objective(x)


def _received(bf: Beamformer, ch: ChannelSet):
    p = ch.h_id.conj() @ bf.all_beams.T
    return np.diag(p[:, : bf.k]).copy(), np.sum(np.abs(p) ** 2, axis=1)


def update_beta(bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> np.ndarray:
    """MMSE receive coefficient of every ID user."""
    desired, total = _received(bf, ch)
    return desired / (total + budgets.sigma2)


def update_omega(bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> np.ndarray:
    # maximizer of log(w) - w*e + 1 at the MMSE receiver is 1/e_min = 1 + SINR
    return 1.0 + sinr_all(bf, ch, budgets)


def mse(beta: np.ndarray, bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> np.ndarray:
    desired, total = _received(bf, ch)
    return (1.0 - 2.0 * np.real(np.conj(beta) * desired)
            + np.abs(beta) ** 2 * (total + budgets.sigma2))


def _scale(budgets: SystemBudgets) -> np.ndarray:
    return budgets.weights / np.log(budgets.rate_base)


def surrogate_value(bf: Beamformer, beta: np.ndarray, omega: np.ndarray,
                    ch: ChannelSet, budgets: SystemBudgets) -> float:
    """Weighted WMMSE surrogate; equals ``sum_rate`` at the optimal beta, omega."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    e = mse(beta, bf, ch, budgets)
    return float(np.sum(_scale(budgets) * (np.log(omega) - omega * e + 1.0)))


def assemble_quadratics(beta: np.ndarray, omega: np.ndarray, ch: ChannelSet,
                        budgets: SystemBudgets) -> SurrogateState:
    beta = np.asarray(beta, dtype=np.complex128)
    omega = np.asarray(omega, dtype=float)
    s = _scale(budgets)
    h = ch.h_id
    coef = s * omega * np.abs(beta) ** 2
    a_block = (h.T * coef) @ h.conj()
    a_block = 0.5 * (a_block + a_block.conj().T)
    b_id = (s * omega * beta)[:, None] * h
    c2 = float(np.sum(s * (np.log(omega) - omega - omega * np.abs(beta) ** 2 * budgets.sigma2 + 1.0)))
    he = ch.h_eh
    e_block = he.T @ he.conj()
    e_block = 0.5 * (e_block + e_block.conj().T)
    return SurrogateState(beta=beta, omega=omega, scale=s, a_block=a_block, b_id=b_id,
                          c2=c2, e_block=e_block, g=ch.g)


def surrogate_state(bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> SurrogateState:
    """Closed-form beta/omega updates at ``bf`` followed by assembly."""
    return assemble_quadratics(update_beta(bf, ch, budgets), update_omega(bf, ch, budgets),
                               ch, budgets)
