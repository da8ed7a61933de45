"""Beamformer state and the performance / constraint evaluators.

Every evaluator works on per-user blocks. The stacked vectors f_I, f_E and
f_IE are row-major flattenings of ``f_id`` (K, N) and ``f_eh`` (G, N), so the
selection-matrix products of the stacked formulation reduce to indexing.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet

__all__ = [
    "Beamformer",
    "SystemBudgets",
    "FeasibilityReport",
    "gains",
    "sinr",
    "sinr_all",
    "rates",
    "sum_rate",
    "harvested_energy",
    "total_harvested",
    "per_antenna_power",
    "check_feasibility",
]


@dataclass
class Beamformer:
    f_id: np.ndarray
    f_eh: np.ndarray

    def __post_init__(self):
        self.f_id = np.asarray(self.f_id, dtype=np.complex128)
        self.f_eh = np.asarray(self.f_eh, dtype=np.complex128)
        if self.f_id.ndim != 2 or self.f_eh.ndim != 2:
            raise ValueError("beams must be 2-D arrays with one row per user")
        if self.f_id.shape[1] != self.f_eh.shape[1]:
            raise ValueError("ID and EH beams must have the same length")

    @property
    def n(self) -> int:
        return self.f_id.shape[1]

    @property
    def k(self) -> int:
        return self.f_id.shape[0]

    @property
    def g(self) -> int:
        return self.f_eh.shape[0]

    @property
    def all_beams(self) -> np.ndarray:
        """(K+G, N) matrix, ID beams first."""
        return np.vstack([self.f_id, self.f_eh])

    @property
    def f_i(self) -> np.ndarray:
        return self.f_id.ravel()

    @property
    def f_e(self) -> np.ndarray:
        return self.f_eh.ravel()

    def stacked(self) -> np.ndarray:
        """The f_IE vector of length N(K+G)."""
        return self.all_beams.ravel()

    @classmethod
    def from_stacked(cls, x: np.ndarray, k: int, g: int, n: int) -> "Beamformer":
        x = np.asarray(x, dtype=np.complex128)
        if x.size != n * (k + g):
            raise ValueError(f"stacked vector has length {x.size}, expected {n * (k + g)}")
        beams = x.reshape(k + g, n)
        return cls(beams[:k].copy(), beams[k:].copy())

    @classmethod
    def zeros(cls, k: int, g: int, n: int) -> "Beamformer":
        return cls(np.zeros((k, n), complex), np.zeros((g, n), complex))

    def copy(self) -> "Beamformer":
        return Beamformer(self.f_id.copy(), self.f_eh.copy())


@dataclass
class SystemBudgets:
    """Power budgets, noise and rate weights.

    ``p_t`` is the per-antenna power limit, ``q_t`` the minimum total
    harvested power, ``sigma2`` the per-ID-user noise power (all watts).
    """

    p_t: float
    q_t: float
    sigma2: np.ndarray
    zeta: float = 1.0
    weights: np.ndarray | None = None
    rate_base: float = 2.0

    def __post_init__(self):
        self.sigma2 = np.atleast_1d(np.asarray(self.sigma2, dtype=float))
        if self.weights is None:
            self.weights = np.ones_like(self.sigma2)
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if self.p_t <= 0:
            raise ValueError("p_t must be positive")
        if self.q_t < 0:
            raise ValueError("q_t must be non-negative")
        if not 0 < self.zeta <= 1:
            raise ValueError("zeta must lie in (0, 1]")
        if np.any(self.sigma2 <= 0):
            raise ValueError("noise powers must be positive")
        if np.any(self.weights < 0):
            raise ValueError("rate weights must be non-negative")
        if self.weights.shape != self.sigma2.shape:
            raise ValueError("one weight per ID user is required")


@dataclass
class FeasibilityReport:
    max_power: float
    power_violation: float
    harvested: float
    eh_shortfall: float
    eh_shortfall_rel: float
    tol: float
    per_antenna: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    @property
    def feasible(self) -> bool:
        return self.power_violation <= self.tol and self.eh_shortfall_rel <= self.tol


def gains(bf: Beamformer, h: np.ndarray) -> np.ndarray:
    """|h_u^H f_j|^2 for every user row ``u`` of ``h`` and every beam ``j``."""
    return np.abs(h.conj() @ bf.all_beams.T) ** 2


def sinr_all(bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> np.ndarray:
    p = gains(bf, ch.h_id)
    k = bf.k
    sig = np.diag(p[:, :k]).copy()
    interf = p.sum(axis=1) - sig
    return sig / (interf + budgets.sigma2)


def sinr(k: int, bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> float:
    h = ch.h_id[k]
    p = np.abs(bf.all_beams @ h.conj()) ** 2
    sig = p[k]
    interf = p[np.arange(p.size) != k].sum()
    return float(sig / (interf + budgets.sigma2[k]))


def rates(bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> np.ndarray:
    return np.log1p(sinr_all(bf, ch, budgets)) / np.log(budgets.rate_base)


def sum_rate(bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> float:
    """Weighted sum-rate, in bits/s/Hz for the default base 2."""
    return float(np.dot(budgets.weights, rates(bf, ch, budgets)))


def harvested_energy(g: int, bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> float:
    """Power harvested by EH user ``g`` from every beam; noise is ignored."""
    h = ch.h_eh[g]
    return float(budgets.zeta * np.sum(np.abs(bf.all_beams @ h.conj()) ** 2))


def total_harvested(bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets) -> float:
    if ch.g == 0:
        return 0.0
    return float(budgets.zeta * gains(bf, ch.h_eh).sum())


def per_antenna_power(bf: Beamformer) -> np.ndarray:
    """Transmit power of every antenna summed over all beams, shape (N,)."""
    return np.sum(np.abs(bf.all_beams) ** 2, axis=0)


def check_feasibility(bf: Beamformer, ch: ChannelSet, budgets: SystemBudgets,
                      tol: float = 1e-6) -> FeasibilityReport:
    p = per_antenna_power(bf)
    pmax = float(p.max()) if p.size else 0.0
    q = total_harvested(bf, ch, budgets)
    short = max(0.0, budgets.q_t - q)
    return FeasibilityReport(
        max_power=pmax,
        power_violation=max(0.0, pmax / budgets.p_t - 1.0),
        harvested=q,
        eh_shortfall=short,
        eh_shortfall_rel=short / budgets.q_t if budgets.q_t > 0 else 0.0,
        tol=tol,
        per_antenna=p,
    )
