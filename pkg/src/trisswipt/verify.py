"""Self-check suite behind the ``verify`` command.

Each check runs a handful of seeded instances against an independent
reference and reports its worst deviation. ``scale`` multiplies the
instance counts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admm import AdmmConfig, AdmmState, FSubproblem, solve_inner, update_w
from .channel import draw_scenario_channels
from .instances import inner_problem, objective_gap
from .model import Beamformer, check_feasibility, sum_rate
from .numeric import make_rng, sample_cn01
from .oracle import (dykstra_project, solve_inner_reference, solve_qcqp_1c, verify_kkt_f_update,
                     verify_kkt_w_update)
from .pipeline import OuterConfig, budgets_for, run_outer
from .scenario import Scenario
from .tma import TmaSymbol, first_harmonic, symbol_to_timing
from .wmmse import surrogate_value, update_beta, update_omega

__all__ = ["CheckResult", "CHECKS", "run_checks"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    limit: float
    count: int

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<28} worst={self.worst:.3e}  limit={self.limit:.1e}  n={self.count}"


def _random_beamformer(rng, k, g, n, p_t):
    x = sample_cn01(rng, (k + g) * n).reshape(k + g, n)
    x *= np.sqrt(p_t / np.max(np.sum(np.abs(x) ** 2, axis=0)))
    return Beamformer(x[:k], x[k:])


def check_wmmse_identity(count: int) -> CheckResult:
    worst = 0.0
    for seed in range(count):
        sc = Scenario(seed=seed)
        ch = draw_scenario_channels(sc)
        b = budgets_for(sc, ch)
        bf = _random_beamformer(make_rng(seed, "verify-bf"), sc.K, sc.G, sc.n, b.p_t)
        val = surrogate_value(bf, update_beta(bf, ch, b), update_omega(bf, ch, b), ch, b)
        worst = max(worst, abs(val - sum_rate(bf, ch, b)))
    return CheckResult("wmmse identity", worst <= 1e-9, worst, 1e-9, count)


def check_closed_forms(count: int) -> CheckResult:
    worst = 0.0
    for seed in range(count):
        prob = inner_problem(seed)
        rng = make_rng(seed, "verify-kkt")
        shape = prob.lin.b4.shape
        w = sample_cn01(rng, shape[0] * shape[1]).reshape(shape)
        tau = sample_cn01(rng, shape[0] * shape[1]).reshape(shape)
        sub = FSubproblem(prob.state, prob.lin, 1.0)
        bbar3 = sub.bbar3(w, tau)
        x, kappa = sub.minimize(bbar3)
        worst = max(worst, verify_kkt_f_update(x, sub.bbar, bbar3, prob.lin).max_residual)
        # the same subproblem as a quadratic-constraint problem with zero curvature
        B = np.kron(np.eye(shape[0]), sub.bbar)
        _, rep = solve_qcqp_1c(B, bbar3.ravel(), 0.0, np.zeros_like(B), prob.lin.b4.ravel(),
                               -prob.lin.c3)
        worst = max(worst, abs(rep.multiplier - kappa) / max(1.0, abs(kappa)))
        b6 = x + tau
        wn = update_w(AdmmState(x, w, tau, 1.0), prob.p_t)
        for n in range(shape[1]):
            worst = max(worst, verify_kkt_w_update(wn[:, n], b6[:, n], prob.p_t).max_residual)
    return CheckResult("closed-form KKT", worst <= 1e-8, worst, 1e-8, count)


def check_admm_gap(count: int) -> CheckResult:
    worst = 0.0
    for seed in range(count):
        prob = inner_problem(seed)
        x0 = prob.start.all_beams
        _, ref, _ = solve_inner_reference(prob.state, prob.lin, prob.p_t, x0=x0)
        res = solve_inner(prob.state, prob.lin, prob.p_t,
                          AdmmConfig(max_iter=50, primal_tol=1e-30, step_tol=1e-30), warm_start=x0)
        worst = max(worst, objective_gap(prob.state, res.x, ref))
    return CheckResult("admm vs reference", worst <= 1e-4, worst, 1e-4, count)


def check_dykstra(count: int) -> CheckResult:
    worst = 0.0
    for seed in range(count):
        prob = inner_problem(seed)
        rng = make_rng(seed, "verify-dykstra")
        shape = prob.lin.b4.shape
        Y = 2.0 * sample_cn01(rng, shape[0] * shape[1]).reshape(shape)
        X = dykstra_project(Y, prob.p_t, prob.lin)
        ball = np.max(np.sum(np.abs(X) ** 2, axis=0)) - prob.p_t
        half = prob.lin.value(X) / max(1.0, abs(prob.lin.c3))
        worst = max(worst, ball, half, 0.0)
    return CheckResult("dykstra feasibility", worst <= 1e-10, worst, 1e-10, count)


def check_tma(count: int) -> CheckResult:
    rng = make_rng(0, "verify-tma")
    worst = 0.0
    for _ in range(count):
        sym = TmaSymbol(float(rng.uniform(0, 1)), float(rng.uniform(0, 2 * np.pi)), 1.0)
        c = first_harmonic(symbol_to_timing(sym))
        worst = max(worst, abs(abs(c) - 2 / np.pi * sym.amplitude))
        if sym.amplitude > 1e-6:
            worst = max(worst, abs(np.angle(np.exp(1j * sym.phase) * c / abs(c))))
    return CheckResult("tma round trip", worst <= 1e-9, worst, 1e-9, count)


def check_runs(count: int) -> CheckResult:
    """Worst violation as a multiple of its limit (rate drop 1e-9, power 1e-8, EH 1e-6)."""
    worst = 0.0
    for seed in range(count):
        res, ch, b = run_outer(Scenario(seed=seed), OuterConfig(max_outer=30))
        trace = res.rate_trace
        drop = max([0.0] + [a - c for a, c in zip(trace, trace[1:])])
        rep = check_feasibility(res.beamformer, ch, b)
        worst = max(worst, drop / 1e-9, rep.power_violation / 1e-8, rep.eh_shortfall_rel / 1e-6)
    return CheckResult("run monotone + feasible", worst <= 1.0, worst, 1.0, count)


CHECKS = {
    "wmmse": (check_wmmse_identity, 20),
    "kkt": (check_closed_forms, 10),
    "admm": (check_admm_gap, 10),
    "dykstra": (check_dykstra, 10),
    "tma": (check_tma, 200),
    "runs": (check_runs, 5),
}


def run_checks(names=None, scale: float = 1.0) -> list:
    out = []
    for name in names or CHECKS:
        fn, base = CHECKS[name]
        out.append(fn(max(1, int(round(base * scale)))))
    return out
