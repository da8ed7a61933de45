"""Command-line entry point: run, sweep, verify, tma-dump."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import run_experiment, write_outputs
from .config import SWEEP_AXES, ExperimentConfig, SweepSpec, load_config
from .pipeline import OuterConfig, ScenarioInfeasible, run_outer
from .tma import DEFAULT_PERIOD, timing_table, write_timing_csv

log = logging.getLogger("trisswipt")


def _base_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seeds is not None:
        cfg.seeds = list(range(args.seed_start, args.seed_start + args.seeds))
    if args.n:
        cfg.n_grid = list(args.n)
    if args.algorithm:
        cfg.algorithm = args.algorithm
    if args.out:
        cfg.output = args.out
    if args.p_t_dbm is not None:
        cfg.scenario = cfg.scenario.replace(p_t_dbm=args.p_t_dbm)
    if args.noise_dbm is not None:
        cfg.scenario = cfg.scenario.replace(noise_dbm=args.noise_dbm)
    if args.max_outer is not None:
        cfg.outer.max_outer = args.max_outer
    if args.rho is not None:
        cfg.admm = replace(cfg.admm, rho=args.rho)
        cfg.outer.admm = cfg.admm
    if args.workers is not None:
        cfg.workers = args.workers
    if getattr(args, "traces", None):
        cfg.traces = args.traces
    if getattr(args, "timing", False):
        cfg.timing.enabled = True
    # re-run validation after overrides
    return ExperimentConfig.from_dict(cfg.to_dict())


def _report(result, paths) -> None:
    for r in result.records:
        if r.status == "ok":
            print(f"{r.algorithm:6s} N={r.N:3d} value={r.sweep_value:<8g} seed={r.seed:<4d} "
                  f"sum_rate={r.sum_rate:.4f} outer={r.outer_iters} wall={r.wall_ms:.1f} ms")
        else:
            print(f"{r.algorithm:6s} N={r.N:3d} value={r.sweep_value:<8g} seed={r.seed:<4d} "
                  f"{r.status}: {r.message}")
    for t in result.timings:
        print(f"timing N={t.N} seed={t.seed}: admm {t.admm_ms:.3f} ms, "
              f"reference {t.oracle_ms:.3f} ms, speedup {t.speedup:.1f}x")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")


def cmd_run(args) -> int:
    cfg = _base_config(args)
    cfg.sweep = SweepSpec()
    if not args.traces:
        cfg.traces = "inner"
    result = run_experiment(cfg)
    _report(result, write_outputs(result, figures=not args.no_figures))
    return 0 if all(r.status == "ok" for r in result.records) else 1


def cmd_sweep(args) -> int:
    cfg = _base_config(args)
    values = args.values if args.values else (cfg.sweep.values if cfg.sweep.axis == args.axis else [])
    cfg.sweep = SweepSpec(axis=args.axis, values=values)
    result = run_experiment(cfg)
    _report(result, write_outputs(result, figures=not args.no_figures))
    return 0


def cmd_verify(args) -> int:
    from .verify import CHECKS, run_checks

    names = args.only or list(CHECKS)
    results = run_checks(names, scale=args.scale)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_tma_dump(args) -> int:
    cfg = _base_config(args)
    scen = cfg.scenario.with_n(cfg.n_grid[0]).replace(seed=cfg.seeds[0])
    try:
        res, _, budgets = run_outer(scen, replace(cfg.outer, inner="admm"))
    except ScenarioInfeasible as exc:
        print(f"scenario infeasible: {exc}", file=sys.stderr)
        return 1
    beams = res.beamformer.all_beams
    if not 0 <= args.beam < beams.shape[0]:
        print(f"beam index {args.beam} outside 0..{beams.shape[0] - 1}", file=sys.stderr)
        return 2
    amax = args.amplitude_max if args.amplitude_max else float(np.sqrt(budgets.p_t))
    rows = timing_table(beams[args.beam], period=args.period, amplitude_max=amax,
                        mirrored=args.mirrored)
    out = Path(args.out or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    path = write_timing_csv(out / f"tma_beam{args.beam}_s{scen.seed}.csv", rows)
    print(f"wrote {path} ({len(rows)} elements)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trisswipt", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="YAML experiment file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seeds", type=int, help="number of seeds")
        sp.add_argument("--seed-start", type=int, default=0)
        sp.add_argument("--n", type=int, nargs="+", help="array sizes N")
        sp.add_argument("--algorithm", choices=["admm", "oracle", "both"])
        sp.add_argument("--p-t-dbm", type=float, help="per-element power limit (dBm)")
        sp.add_argument("--noise-dbm", type=float, help="noise power (dBm)")
        sp.add_argument("--max-outer", type=int)
        sp.add_argument("--rho", type=float)
        sp.add_argument("--workers", type=int)

    sp = sub.add_parser("run", help="optimize one scenario per seed")
    common(sp)
    sp.add_argument("--traces", choices=["inner", "outer", "none"])
    sp.add_argument("--timing", action="store_true", help="also time ADMM against the reference")
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="sweep one parameter over seeds and array sizes")
    common(sp)
    sp.add_argument("--axis", required=True, choices=[a for a in SWEEP_AXES if a != "none"])
    sp.add_argument("--values", type=float, nargs="+")
    sp.add_argument("--traces", choices=["inner", "outer", "none"])
    sp.add_argument("--timing", action="store_true")
    sp.add_argument("--no-figures", action="store_true")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="run the invariant and reference checks")
    sp.add_argument("--only", nargs="+", help="subset of checks")
    sp.add_argument("--scale", type=float, default=1.0, help="multiply instance counts")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("tma-dump", help="write 1-bit control timings for one beam")
    common(sp)
    sp.add_argument("--beam", type=int, default=0, help="beam index (ID beams first)")
    sp.add_argument("--period", type=float, default=DEFAULT_PERIOD)
    sp.add_argument("--amplitude-max", type=float,
                    help="reference amplitude (default sqrt of the per-element power limit)")
    sp.add_argument("--mirrored", action="store_true", help="use the tau > T/2 branch")
    sp.set_defaults(func=cmd_tma_dump)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
