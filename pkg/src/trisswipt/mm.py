"""Tangent (minorizing) linearization of the total harvested-energy constraint."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Beamformer, SystemBudgets
from .wmmse import SurrogateState

__all__ = ["LinearizedEhConstraint", "linearize_eh", "eh_quadratic"]


@dataclass
class LinearizedEhConstraint:
    """Affine constraint ``-2 Re{b4^H f_IE} - c3 <= 0``.

    ``b4`` is held as a (K+G, N) matrix of per-beam segments.
    """

    b4: np.ndarray
    c3: float

    def value(self, x: np.ndarray) -> float:
        """Constraint function; non-positive means feasible."""
        X = np.asarray(x).reshape(self.b4.shape)
        return float(-2.0 * np.real(np.vdot(self.b4, X)) - self.c3)

    @property
    def threshold(self) -> float:
        """Right-hand side ``t`` of the equivalent halfspace Re{b4^H x} >= t."""
        return -0.5 * self.c3


def eh_quadratic(x: np.ndarray, e_block: np.ndarray) -> float:
    """x^H B10 x for a stacked or (beams, N) shaped ``x``."""
    X = np.asarray(x).reshape(-1, e_block.shape[0])
    return float(np.real(np.sum(X.conj() * (X @ e_block.T))))


def linearize_eh(prev: Beamformer, state: SurrogateState,
                 budgets: SystemBudgets) -> LinearizedEhConstraint:
    """Linearize x^H B10 x >= Q_t / zeta around the previous iterate.

    Since B10 is PSD the tangent plane lies below the quadratic everywhere
    and touches it at ``prev``.
    """
    X0 = prev.all_beams
    b4 = X0 @ state.e_block.T
    q_scaled = budgets.q_t / budgets.zeta
    c3 = -q_scaled - float(np.real(np.vdot(X0, b4)))
    return LinearizedEhConstraint(b4=b4, c3=c3)
