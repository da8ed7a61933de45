"""Outer block-coordinate loop: WMMSE updates, MM linearization, inner solve.

The loop runs on a normalized copy of the problem (per-antenna limit 1,
reference noise power 1) so the ADMM penalty and tolerances do not depend
on the physical power and path-loss scales. Results are mapped back to
watts before they are returned.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .admm import AdmmConfig, solve_inner
from .channel import ChannelSet, draw_scenario_channels
from .mm import linearize_eh
from .model import Beamformer, SystemBudgets, check_feasibility, sum_rate, total_harvested
from .oracle import solve_inner_reference
from .scenario import Scenario
from .wmmse import surrogate_state

__all__ = [
    "ScenarioInfeasible",
    "OuterConfig",
    "OuterStep",
    "OuterResult",
    "normalize",
    "reference_harvest",
    "best_harvest_bound",
    "budgets_for",
    "initial_beamformer",
    "optimize",
    "run_outer",
]

log = logging.getLogger(__name__)


class ScenarioInfeasible(RuntimeError):
    """The harvesting target cannot be met even with full-power energy beams."""


@dataclass
class OuterConfig:
    inner: str = "admm"
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    max_outer: int = 100
    rel_tol: float = 1e-5
    oracle_tol: float = 1e-9
    oracle_max_iter: int = 100_000
    init_margin: float = 0.9

    def __post_init__(self):
        if self.inner not in ("admm", "oracle"):
            raise ValueError(f"unknown inner solver {self.inner!r}")


@dataclass
class OuterStep:
    outer_iter: int
    sum_rate: float
    surrogate: float
    inner_iters: int
    inner_converged: bool
    accepted: bool
    wall_ms: float
    inner_trace: list = field(default_factory=list, repr=False)
    # true sum-rate of the inner solution, kept even when it was rejected
    candidate_rate: float = math.nan


@dataclass
class OuterResult:
    beamformer: Beamformer
    sum_rate: float
    harvested: float
    steps: list
    converged: bool
    initial: Beamformer

    @property
    def rate_trace(self) -> list:
        """Sum-rate after every accepted outer iteration, initial point first."""
        return [s.sum_rate for s in self.steps if s.accepted]

    @property
    def outer_iters(self) -> int:
        return sum(1 for s in self.steps if s.outer_iter > 0)

    @property
    def inner_iters_total(self) -> int:
        return sum(s.inner_iters for s in self.steps)


@dataclass
class _Scaling:
    sigma_ref2: float
    p_t: float


def normalize(ch: ChannelSet, budgets: SystemBudgets):
    """Rescale so that P_t = 1 and the smallest noise power is 1.

    Beams scale by 1/sqrt(P_t) and channels by sqrt(P_t)/sigma_ref, which
    leaves every SINR unchanged; the harvesting target is divided by
    sigma_ref^2.
    """
    s2 = float(np.min(budgets.sigma2)) if budgets.sigma2.size else 1.0
    hs = np.sqrt(budgets.p_t / s2)
    ch_n = ChannelSet(ch.h_id * hs, ch.h_eh * hs, ch.id_positions, ch.eh_positions)
    b_n = SystemBudgets(p_t=1.0, q_t=budgets.q_t / s2, sigma2=budgets.sigma2 / s2,
                        zeta=budgets.zeta, weights=budgets.weights, rate_base=budgets.rate_base)
    return ch_n, b_n, _Scaling(s2, budgets.p_t)


def _energy_beam(ch: ChannelSet, p_t: float) -> np.ndarray:
    # equal-power beam co-phased with the dominant eigenvector of sum_g h_g h_g^H
    E = ch.h_eh.T @ ch.h_eh.conj()
    _, vecs = np.linalg.eigh(0.5 * (E + E.conj().T))
    v = vecs[:, -1]
    return np.sqrt(p_t) * np.exp(1j * np.angle(v))


def _per_antenna_normalize(F: np.ndarray, power: float) -> np.ndarray:
    norms2 = np.sum(np.abs(F) ** 2, axis=0)
    scale = np.where(norms2 > 0, np.sqrt(power / np.where(norms2 > 0, norms2, 1.0)), 0.0)
    return F * scale


def _unit_rows(h: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(h, axis=1, keepdims=True)
    return h / np.where(nrm > 0, nrm, 1.0)


def reference_harvest(ch: ChannelSet, budgets: SystemBudgets) -> float:
    """Harvest of full-power matched-filter energy beams with the ID beams off."""
    if ch.g == 0:
        return 0.0
    f_eh = _per_antenna_normalize(_unit_rows(ch.h_eh), budgets.p_t)
    bf = Beamformer(np.zeros((ch.k, ch.n), complex), f_eh)
    return total_harvested(bf, ch, budgets)


def best_harvest_bound(ch: ChannelSet, budgets: SystemBudgets) -> float:
    """Largest harvest among the matched-filter and co-phased full-power energy beams."""
    if ch.g == 0:
        return 0.0
    f = _energy_beam(ch, budgets.p_t)
    f_eh = np.zeros((ch.g, ch.n), complex)
    f_eh[0] = f
    bf = Beamformer(np.zeros((ch.k, ch.n), complex), f_eh)
    return max(total_harvested(bf, ch, budgets), reference_harvest(ch, budgets))


def budgets_for(scenario: Scenario, ch: ChannelSet) -> SystemBudgets:
    b = SystemBudgets(p_t=scenario.p_t, q_t=0.0, sigma2=np.full(scenario.K, scenario.sigma2),
                      zeta=scenario.zeta, rate_base=scenario.rate_base)
    if scenario.q_t is not None:
        b.q_t = float(scenario.q_t)
    elif scenario.G > 0:
        b.q_t = scenario.q_t_fraction * reference_harvest(ch, b)
    return b


def initial_beamformer(ch: ChannelSet, budgets: SystemBudgets, margin: float = 0.9) -> Beamformer:
    """Per-antenna-feasible, EH-feasible starting point.

    First choice: unit-norm matched filters for every user, rescaled per
    antenna to ``margin * P_t``. If that misses the harvesting target, the
    ID matched filters keep a share ``1 - a`` of every antenna and one
    co-phased energy beam takes the share ``a``, with ``a`` the smallest
    grid value that meets the target.
    """
    k, g, n = ch.k, ch.g, ch.n
    F = np.vstack([_unit_rows(ch.h_id), _unit_rows(ch.h_eh)])
    F = _per_antenna_normalize(F, margin * budgets.p_t)
    bf = Beamformer(F[:k], F[k:])
    if budgets.q_t <= 0 or total_harvested(bf, ch, budgets) >= budgets.q_t:
        return bf
    bound = best_harvest_bound(ch, budgets)
    if bound < budgets.q_t:
        raise ScenarioInfeasible(
            f"harvest target {budgets.q_t:.3e} W exceeds full-power energy beams "
            f"({bound:.3e} W)")
    f_id = _per_antenna_normalize(_unit_rows(ch.h_id), budgets.p_t) if k else np.zeros((0, n))
    e = _energy_beam(ch, budgets.p_t)
    for total in (margin, 1.0):
        for a in np.linspace(0.05, 1.0, 20):
            f_eh = np.zeros((g, n), complex)
            f_eh[0] = np.sqrt(a * total) * e
            cand = Beamformer(np.sqrt((1 - a) * total) * f_id, f_eh)
            if total_harvested(cand, ch, budgets) >= budgets.q_t:
                return cand
    raise ScenarioInfeasible("no starting point meets the harvest target")


def _inner_solve(cfg: OuterConfig, state, lin, p_t, warm):
    if cfg.inner == "admm":
        res = solve_inner(state, lin, p_t, cfg.admm, warm_start=warm)
        return res.x, res.iterations, res.converged, res.trace
    X, _, its = solve_inner_reference(state, lin, p_t, x0=warm, tol=cfg.oracle_tol,
                                   max_iter=cfg.oracle_max_iter)
    return X, its, its < cfg.oracle_max_iter, []


def optimize(ch: ChannelSet, budgets: SystemBudgets, config: OuterConfig | None = None,
             init: Beamformer | None = None, observer=None) -> OuterResult:
    """Maximize the weighted sum-rate from a feasible start.

    Each outer iteration refreshes beta and omega, re-linearizes the EH
    constraint at the current iterate and solves the beam subproblem with
    the configured inner solver. A candidate that lowers the true sum-rate
    (possible only through inexact inner solves) is rejected and ends the
    loop, so the accepted trace is non-decreasing.

    ``observer(t, state, lin, p_t, warm)`` is called with every subproblem
    before it is solved, in normalized units.
    """
    cfg = config or OuterConfig()
    ch_n, b_n, sc = normalize(ch, budgets)
    if init is None:
        bf = initial_beamformer(ch_n, b_n, cfg.init_margin)
    else:
        bf = Beamformer(init.f_id / np.sqrt(sc.p_t), init.f_eh / np.sqrt(sc.p_t))
    initial = bf.copy()
    rate = sum_rate(bf, ch_n, b_n)
    steps = [OuterStep(0, rate, rate, 0, True, True, 0.0)]
    converged = False
    for t in range(1, cfg.max_outer + 1):
        t0 = time.perf_counter()
        state = surrogate_state(bf, ch_n, b_n)
        lin = linearize_eh(bf, state, b_n)
        if observer is not None:
            observer(t, state, lin, b_n.p_t, bf.all_beams.copy())
        X, its, inner_ok, trace = _inner_solve(cfg, state, lin, b_n.p_t, bf.all_beams)
        cand = Beamformer(X[: ch.k], X[ch.k:])
        new_rate = sum_rate(cand, ch_n, b_n)
        wall = (time.perf_counter() - t0) * 1e3
        accepted = new_rate >= rate
        steps.append(OuterStep(t, new_rate if accepted else rate, state.value(X), its,
                               inner_ok, accepted, wall, trace, new_rate))
        if not accepted:
            log.debug("outer %d: candidate rate %.12g below %.12g, stopping", t, new_rate, rate)
            converged = True
            break
        gain = new_rate - rate
        bf, rate = cand, new_rate
        if gain <= cfg.rel_tol * max(abs(rate), 1e-12):
            converged = True
            break

    root = np.sqrt(sc.p_t)
    out = Beamformer(bf.f_id * root, bf.f_eh * root)
    init_out = Beamformer(initial.f_id * root, initial.f_eh * root)
    return OuterResult(beamformer=out, sum_rate=sum_rate(out, ch, budgets),
                       harvested=total_harvested(out, ch, budgets), steps=steps,
                       converged=converged, initial=init_out)


def run_outer(scenario: Scenario, config: OuterConfig | None = None,
              init: Beamformer | None = None):
    """Draw the scenario's channels, set budgets and optimize.

    Returns ``(result, channels, budgets)``.
    """
    ch = draw_scenario_channels(scenario)
    budgets = budgets_for(scenario, ch)
    res = optimize(ch, budgets, config, init)
    rep = check_feasibility(res.beamformer, ch, budgets)
    if not rep.feasible:
        log.warning("seed %d: final beamformer infeasible (%s)", scenario.seed, rep)
    return res, ch, budgets
