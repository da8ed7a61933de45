"""Static PNG figures for experiment outputs."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["AXIS_LABELS", "plot_sweep", "plot_convergence", "plot_rho_residuals",
           "plot_runtime", "render_all"]

AXIS_LABELS = {
    "power": "maximum power per element (mW)",
    "distance": "maximum ID-user distance (m)",
    "alpha": "ID-link path-loss exponent",
    "rho": "ADMM penalty rho",
}

STYLE = {"figure.figsize": (5.0, 3.6), "figure.dpi": 120, "axes.grid": True,
         "grid.alpha": 0.3, "legend.fontsize": 8, "font.size": 9}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_sweep(means: list, axis: str, path) -> Path:
    """Mean sum-rate against the sweep value, one line per (algorithm, N)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        keys = sorted({(m["algorithm"], m["N"]) for m in means})
        for alg, n in keys:
            pts = sorted((m["sweep_value"], m["mean_sum_rate"]) for m in means
                         if m["algorithm"] == alg and m["N"] == n)
            x, y = zip(*pts)
            ax.plot(x, y, marker="o" if alg == "admm" else "x",
                    linestyle="-" if alg == "admm" else "--", label=f"{alg}, N={n}")
        ax.set_xlabel(AXIS_LABELS.get(axis, axis))
        ax.set_ylabel("mean sum-rate (bit/s/Hz)")
        ax.legend()
        return _save(fig, Path(path))


def plot_convergence(records: list, path, max_lines: int = 20) -> Path:
    """Sum-rate against outer iteration for each run."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        shown = [r for r in records if r.rate_trace][:max_lines]
        for r in shown:
            ax.plot(range(len(r.rate_trace)), r.rate_trace,
                    linestyle="-" if r.algorithm == "admm" else "--", linewidth=1,
                    label=f"{r.algorithm} N={r.N} seed {r.seed}" if len(shown) <= 8 else None)
        ax.set_xlabel("outer iteration")
        ax.set_ylabel("sum-rate (bit/s/Hz)")
        if 0 < len(shown) <= 8:
            ax.legend()
        return _save(fig, Path(path))


def plot_rho_residuals(records: list, path) -> Path:
    """Median primal residual of the first inner solve against ADMM iteration, per rho."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        by_rho = {}
        for r in records:
            if r.algorithm == "admm" and r.first_inner:
                by_rho.setdefault(r.sweep_value, []).append([p for _, p, _ in r.first_inner])
        for rho in sorted(by_rho):
            runs = by_rho[rho]
            length = max(len(x) for x in runs)
            # runs that stopped early hold their last residual
            mat = np.array([x + [x[-1]] * (length - len(x)) for x in runs])
            ax.semilogy(np.arange(1, length + 1), np.median(mat, axis=0), label=f"rho={rho:g}")
        ax.set_xlabel("ADMM iteration")
        ax.set_ylabel("||f - w||^2 (median)")
        ax.legend()
        return _save(fig, Path(path))


def plot_runtime(timings: list, path) -> Path:
    """Median inner-solve time per N for both solvers."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ns = sorted({t.N for t in timings})
        a = [np.median([t.admm_ms for t in timings if t.N == n]) for n in ns]
        o = [np.median([t.oracle_ms for t in timings if t.N == n]) for n in ns]
        ax.semilogy(ns, a, marker="o", label="ADMM")
        ax.semilogy(ns, o, marker="x", linestyle="--", label="projected gradient")
        ax.set_xlabel("N")
        ax.set_ylabel("median inner-solve time (ms)")
        ax.legend()
        return _save(fig, Path(path))


def render_all(result, out_dir) -> list:
    from .bench import mean_table

    out = Path(out_dir)
    cfg = result.config
    made = [plot_convergence(result.records, out / "convergence.png")]
    means = [m for m in mean_table(result.records) if not math.isnan(m["mean_sum_rate"])]
    axis = cfg.sweep.axis
    if axis != "none" and means:
        made.append(plot_sweep(means, axis, out / f"sum_rate_vs_{axis}.png"))
    if axis == "rho":
        made.append(plot_rho_residuals(result.records, out / "rho_residuals.png"))
    if result.timings:
        made.append(plot_runtime(result.timings, out / "runtime.png"))
    return made
