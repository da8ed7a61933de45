"""Seeded batch execution of the optimizer and CSV / manifest output."""
from __future__ import annotations

import csv
import json
import logging
import math
import platform
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .admm import AdmmConfig, solve_inner
from .channel import draw_scenario_channels
from .config import ExperimentConfig, apply_sweep_value
from .instances import objective_gap
from .model import check_feasibility
from .oracle import solve_inner_reference
from .pipeline import ScenarioInfeasible, budgets_for, optimize

__all__ = [
    "SUMMARY_COLUMNS",
    "TRACE_COLUMNS",
    "RunRecord",
    "TimingRecord",
    "Cell",
    "ExperimentResult",
    "run_cell",
    "time_cell",
    "run_experiment",
    "mean_table",
    "write_outputs",
]

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["algorithm", "seed", "sweep_value", "N", "K", "G", "sum_rate", "eh_total",
                   "outer_iters", "inner_iters_total", "wall_ms", "status", "feasible",
                   "max_power_violation", "eh_shortfall_rel"]
TRACE_COLUMNS = ["outer_iter", "inner_iter", "surrogate", "sum_rate", "primal_resid",
                 "step_resid"]
TIMING_COLUMNS = ["seed", "sweep_value", "N", "admm_ms", "oracle_ms", "speedup",
                  "admm_iters", "oracle_iters", "admm_gap", "subproblems",
                  "censored"]
# columns that legitimately differ between identical runs
TIMING_FIELDS = {"wall_ms", "admm_ms", "oracle_ms", "speedup"}


@dataclass(frozen=True)
class Cell:
    algorithm: str
    n: int
    value_index: int
    sweep_value: float
    seed: int

    @property
    def tag(self) -> str:
        return f"{self.algorithm}_N{self.n}_v{self.value_index}_s{self.seed}"


@dataclass
class RunRecord:
    algorithm: str
    seed: int
    sweep_value: float
    N: int
    K: int
    G: int
    sum_rate: float = math.nan
    eh_total: float = math.nan
    outer_iters: int = 0
    inner_iters_total: int = 0
    wall_ms: float = math.nan
    status: str = "ok"
    feasible: bool = False
    max_power_violation: float = math.nan
    eh_shortfall_rel: float = math.nan
    message: str = ""
    rate_trace: list = field(default_factory=list, repr=False)
    trace: list = field(default_factory=list, repr=False)
    first_inner: list = field(default_factory=list, repr=False)

    def row(self) -> dict:
        return {c: getattr(self, c) for c in SUMMARY_COLUMNS}


@dataclass
class TimingRecord:
    seed: int
    sweep_value: float
    N: int
    admm_ms: float
    oracle_ms: float
    admm_iters: int
    oracle_iters: int
    admm_gap: float
    subproblems: int = 1
    censored: int = 0

    @property
    def speedup(self) -> float:
        return self.oracle_ms / self.admm_ms if self.admm_ms > 0 else math.inf

    def row(self) -> dict:
        d = asdict(self)
        d["speedup"] = self.speedup
        return {c: d[c] for c in TIMING_COLUMNS}


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    timings: list
    elapsed_s: float = 0.0


def _trace_rows(res, level: str) -> list:
    rows = []
    for st in res.steps:
        inner = st.inner_trace
        if level == "inner" and inner:
            for it, step, primal, obj in inner:
                rows.append((st.outer_iter, it, -obj, st.sum_rate, primal, step))
            continue
        primal = inner[-1][2] if inner else math.nan
        step = inner[-1][1] if inner else math.nan
        rows.append((st.outer_iter, st.inner_iters, st.surrogate, st.sum_rate, primal, step))
    return rows


def run_cell(cfg: ExperimentConfig, cell: Cell) -> RunRecord:
    """One optimizer run; failures are recorded on the row, never raised."""
    scen, admm = apply_sweep_value(cfg.sweep.axis, cell.sweep_value,
                                   cfg.scenario.with_n(cell.n).replace(seed=cell.seed), cfg.admm)
    rec = RunRecord(cell.algorithm, cell.seed, cell.sweep_value, scen.n, scen.K, scen.G)
    outer = replace(cfg.outer, inner=cell.algorithm, admm=replace(admm, record_trace=True))
    try:
        ch = draw_scenario_channels(scen)
        budgets = budgets_for(scen, ch)
        t0 = time.perf_counter()
        res = optimize(ch, budgets, outer)
        rec.wall_ms = (time.perf_counter() - t0) * 1e3
    except ScenarioInfeasible as exc:
        rec.status, rec.message = "infeasible", str(exc)
        return rec
    except Exception as exc:  # noqa: BLE001 - a sweep must survive one bad cell
        log.exception("cell %s failed", cell.tag)
        rec.status, rec.message = "error", f"{type(exc).__name__}: {exc}"
        return rec
    rep = check_feasibility(res.beamformer, ch, budgets, tol=1e-6)
    rec.sum_rate = res.sum_rate
    rec.eh_total = res.harvested
    rec.outer_iters = res.outer_iters
    rec.inner_iters_total = res.inner_iters_total
    rec.feasible = rep.feasible
    rec.max_power_violation = rep.power_violation
    rec.eh_shortfall_rel = rep.eh_shortfall_rel
    rec.rate_trace = res.rate_trace
    if cfg.traces != "none":
        rec.trace = _trace_rows(res, cfg.traces)
    if len(res.steps) > 1 and res.steps[1].inner_trace:
        rec.first_inner = [(it, primal, obj) for it, _, primal, obj in res.steps[1].inner_trace]
    if not rep.feasible:
        rec.status = "infeasible-result"
    return rec


def _median_time(fn, reps: int, single_above: float = 1.0):
    """Median wall time (ms) over ``reps`` calls; a call over ``single_above`` s is not repeated."""
    times, out = [], None
    for _ in range(max(1, reps)):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
        if times[-1] > single_above:
            break
    return float(np.median(times)) * 1e3, out


def _subproblems(cfg: ExperimentConfig, scen, admm: AdmmConfig) -> list:
    """Subproblems met along one ADMM run, or only the first one."""
    ch = draw_scenario_channels(scen)
    budgets = budgets_for(scen, ch)
    found = []
    first = cfg.timing.instances == "first"
    outer = replace(cfg.outer, inner="admm", admm=replace(admm, record_trace=False),
                    max_outer=1 if first else cfg.outer.max_outer)
    optimize(ch, budgets, outer, observer=lambda t, st, lin, p_t, warm:
             found.append((st, lin, p_t, warm)))
    return found


def time_cell(cfg: ExperimentConfig, n: int, value: float, seed: int,
              admm: AdmmConfig | None = None) -> TimingRecord:
    """Inner-solve wall time of ADMM against the reference solver.

    The subproblems are those met along the ADMM run of the cell (or just
    the first one when ``cfg.timing.instances == "first"``); times are
    summed over them. On each subproblem both solvers start from the same
    point and stop at the first feasible iterate within 1e-6 (relative) of
    a tightly solved optimum, so the comparison is at equal objective
    accuracy. The reference is the textbook projected gradient method; a
    run longer than ``cfg.timing.oracle_cap_s`` is stopped, timed once and
    counted as censored, so ``oracle_ms`` is then a lower bound.
    """
    scen, admm_v = apply_sweep_value(cfg.sweep.axis, value,
                                     cfg.scenario.with_n(n).replace(seed=seed), admm or cfg.admm)
    a_total = o_total = 0.0
    a_its = o_its = censored = 0
    worst_gap = 0.0
    cap = cfg.timing.oracle_cap_s
    subs = _subproblems(cfg, scen, admm_v)
    for state, lin, p_t, x0 in subs:
        _, ref, _ = solve_inner_reference(state, lin, p_t, x0=x0, tol=1e-11)
        target = ref + 1e-6 * abs(ref)
        # only the objective target stops ADMM, so it also reaches the target accuracy
        a_cfg = replace(admm_v, record_trace=False, obj_target=target, primal_tol=1e-300,
                        step_tol=1e-300, max_iter=max(admm_v.max_iter, 20_000))
        a_ms, a_res = _median_time(
            lambda: solve_inner(state, lin, p_t, a_cfg, warm_start=x0), cfg.timing.reps)

        def reference():
            return solve_inner_reference(state, lin, p_t, x0=x0, obj_target=target, method="pg",
                                      time_limit=cap)

        o_ms, o_res = _median_time(reference, cfg.timing.reps)
        if o_res[1] > target:
            censored += 1
        a_total += a_ms
        o_total += o_ms
        a_its += a_res.iterations
        o_its += o_res[2]
        worst_gap = max(worst_gap, objective_gap(state, a_res.x, ref))
    return TimingRecord(seed, value, scen.n, a_total, o_total, a_its, o_its, worst_gap,
                        len(subs), censored)


def _cells(cfg: ExperimentConfig) -> list:
    return [Cell(alg, n, i, v, s)
            for alg in cfg.algorithms
            for n in cfg.n_grid
            for i, v in enumerate(cfg.sweep.points())
            for s in cfg.seeds]


def _run_cell_star(args):
    return run_cell(*args)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every (algorithm, N, sweep value, seed) cell; results come back in cell order."""
    t0 = time.perf_counter()
    cells = _cells(cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_cell_star, [(cfg, c) for c in cells]))
    else:
        records = [run_cell(cfg, c) for c in cells]
    timings = []
    if cfg.timing.enabled:
        for n in cfg.n_grid:
            for v in cfg.sweep.points():
                for s in cfg.seeds:
                    timings.append(time_cell(cfg, n, v, s))
    return ExperimentResult(cfg, records, timings, time.perf_counter() - t0)


def mean_table(records: list) -> list:
    """Per (algorithm, N, sweep value) means over the successful seeds."""
    groups = {}
    for r in records:
        groups.setdefault((r.algorithm, r.N, r.sweep_value), []).append(r)
    out = []
    for (alg, n, v), rs in groups.items():
        ok = [r for r in rs if r.status == "ok"]
        rates = np.array([r.sum_rate for r in ok])
        out.append({
            "algorithm": alg, "sweep_value": v, "N": n, "seeds": len(rs), "ok": len(ok),
            "mean_sum_rate": float(rates.mean()) if ok else math.nan,
            "std_sum_rate": float(rates.std(ddof=1)) if len(ok) > 1 else math.nan,
            "mean_eh_total": float(np.mean([r.eh_total for r in ok])) if ok else math.nan,
            "mean_outer_iters": float(np.mean([r.outer_iters for r in ok])) if ok else math.nan,
            "median_wall_ms": float(np.median([r.wall_ms for r in ok])) if ok else math.nan,
        })
    return out


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _write_csv(path: Path, columns: list, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            vals = [r[c] for c in columns] if isinstance(r, dict) else r
            w.writerow([_fmt(v) for v in vals])


def _versions() -> dict:
    import matplotlib
    import scipy
    import yaml

    from . import __version__
    return {"trisswipt": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__, "pyyaml": yaml.__version__}


def write_outputs(result: ExperimentResult, out_dir=None, figures: bool = True) -> dict:
    """Write summary.csv, means.csv, trace_*.csv, timing.csv, manifest.json and figures."""
    cfg = result.config
    out = Path(out_dir or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"summary": out / "summary.csv", "means": out / "means.csv"}
    _write_csv(paths["summary"], SUMMARY_COLUMNS, [r.row() for r in result.records])
    means = mean_table(result.records)
    _write_csv(paths["means"], list(means[0]) if means else ["algorithm"], means)
    trace_files = []
    if cfg.traces != "none":
        cells = _cells(cfg)
        for cell, rec in zip(cells, result.records):
            if rec.trace:
                p = out / f"trace_{cell.tag}.csv"
                _write_csv(p, TRACE_COLUMNS, rec.trace)
                trace_files.append(p.name)
    if result.timings:
        paths["timing"] = out / "timing.csv"
        _write_csv(paths["timing"], TIMING_COLUMNS, [t.row() for t in result.timings])
    figs = []
    if figures:
        from .plots import render_all
        figs = [p.name for p in render_all(result, out)]
    manifest = {
        "config": cfg.to_dict(),
        "versions": _versions(),
        "seeds": cfg.seeds,
        "cells": len(result.records),
        "status_counts": _count(r.status for r in result.records),
        "elapsed_s": result.elapsed_s,
        "files": sorted([p.name for p in paths.values()] + trace_files + figs),
    }
    paths["manifest"] = out / "manifest.json"
    paths["manifest"].write_text(json.dumps(manifest, indent=2, default=str))
    return paths


def _count(items) -> dict:
    return dict(Counter(items))
