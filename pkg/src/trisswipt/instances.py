"""Seeded benchmark instances of the beam subproblem.

An inner problem is the first subproblem a run meets: channels drawn for a
seeded scenario, the problem normalized, and the surrogate and EH tangent
built at the standard starting point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import draw_scenario_channels
from .mm import LinearizedEhConstraint, linearize_eh
from .model import Beamformer, SystemBudgets
from .pipeline import OuterConfig, budgets_for, initial_beamformer, normalize, optimize
from .scenario import Scenario
from .wmmse import SurrogateState, surrogate_state

__all__ = ["InnerProblem", "inner_problem", "objective_gap"]


@dataclass
class InnerProblem:
    state: SurrogateState
    lin: LinearizedEhConstraint
    start: Beamformer
    budgets: SystemBudgets
    seed: int

    @property
    def p_t(self) -> float:
        return self.budgets.p_t


def inner_problem(seed: int, n: int = 16, k: int = 2, g: int = 2,
                  scenario: Scenario | None = None, after: int = 0) -> InnerProblem:
    """Subproblem at the starting point, or after ``after`` ADMM outer iterations."""
    base = scenario or Scenario()
    sc = base.replace(K=k, G=g, seed=seed).with_n(n)
    ch = draw_scenario_channels(sc)
    ch_n, b_n, _ = normalize(ch, budgets_for(sc, ch))
    start = initial_beamformer(ch_n, b_n)
    if after > 0:
        start = optimize(ch_n, b_n, OuterConfig(max_outer=after), init=start).beamformer
    state = surrogate_state(start, ch_n, b_n)
    lin = linearize_eh(start, state, b_n)
    return InnerProblem(state, lin, start, b_n, seed)


def objective_gap(state: SurrogateState, x: np.ndarray, ref: float) -> float:
    """Relative objective gap of ``x`` against a reference optimum."""
    return abs(state.objective(x) - ref) / max(abs(ref), 1e-300)
