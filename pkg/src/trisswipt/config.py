"""Experiment configuration: YAML file <-> dataclasses.

Example file::

    scenario:
      p_t_dbm: 10
      K: 2
      G: 2
    n_grid: [16, 49]
    algorithm: both          # admm | oracle | both
    seeds: {start: 0, count: 20}
    sweep: {axis: power, values: [5, 10, 15, 20, 25, 30]}
    admm: {rho: 1.0, max_iter: 300}
    outer: {max_outer: 100, rel_tol: 1.0e-5}
    traces: outer            # inner | outer | none
    timing: {enabled: false, reps: 5, instances: trajectory}
    output: out/power

Every key is optional; missing keys take the defaults below.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .admm import AdmmConfig
from .pipeline import OuterConfig
from .scenario import Scenario, watts_to_dbm

__all__ = ["SWEEP_AXES", "DEFAULT_SWEEP_VALUES", "SweepSpec", "TimingSpec",
           "ExperimentConfig", "load_config", "apply_sweep_value"]

SWEEP_AXES = ("none", "rho", "power", "distance", "alpha")

DEFAULT_SWEEP_VALUES = {
    "rho": [0.6, 0.8, 1.0, 1.2, 1.4],
    "power": [5.0, 10.0, 15.0, 20.0, 25.0, 30.0],      # mW per antenna
    "distance": [50.0, 100.0, 150.0, 200.0, 250.0, 300.0],  # max ID distance, m
    "alpha": [2.8, 3.0, 3.2, 3.4, 3.6, 3.8],           # ID-link path-loss exponent
}


@dataclass
class SweepSpec:
    axis: str = "none"
    values: list = field(default_factory=list)

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; choose from {SWEEP_AXES}")
        if self.axis != "none" and not self.values:
            self.values = list(DEFAULT_SWEEP_VALUES[self.axis])
        self.values = [float(v) for v in self.values]
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")

    def points(self) -> list:
        return self.values if self.axis != "none" else [float("nan")]


@dataclass
class TimingSpec:
    enabled: bool = False
    reps: int = 5
    instances: str = "trajectory"    # trajectory | first
    # reference runs are stopped here; the stopped time is a lower bound
    oracle_cap_s: float = 2.0

    def __post_init__(self):
        if self.instances not in ("trajectory", "first"):
            raise ValueError(f"timing instances must be trajectory or first, not {self.instances!r}")
        if not self.oracle_cap_s > 0:
            raise ValueError("oracle_cap_s must be positive")
        if self.reps < 1:
            raise ValueError("timing reps must be at least 1")


@dataclass
class ExperimentConfig:
    scenario: Scenario = field(default_factory=Scenario)
    n_grid: list = field(default_factory=lambda: [16])
    algorithm: str = "admm"
    seeds: list = field(default_factory=lambda: [0])
    sweep: SweepSpec = field(default_factory=SweepSpec)
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    outer: OuterConfig = field(default_factory=OuterConfig)
    traces: str = "outer"
    timing: TimingSpec = field(default_factory=TimingSpec)
    workers: int = 1
    output: str = "out"

    def __post_init__(self):
        if self.algorithm not in ("admm", "oracle", "both"):
            raise ValueError(f"algorithm must be admm, oracle or both, not {self.algorithm!r}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.traces not in ("inner", "outer", "none"):
            raise ValueError(f"traces must be inner, outer or none, not {self.traces!r}")
        for n in self.n_grid:
            if int(n) < 1:
                raise ValueError(f"invalid array size {n}")
        self.n_grid = [int(n) for n in self.n_grid]
        self.seeds = [int(s) for s in self.seeds]
        self.outer.admm = self.admm

    @property
    def algorithms(self) -> list:
        return ["admm", "oracle"] if self.algorithm == "both" else [self.algorithm]

    def to_dict(self) -> dict:
        outer = {f.name: getattr(self.outer, f.name) for f in fields(OuterConfig) if f.name != "admm"}
        return {
            "scenario": self.scenario.to_dict(),
            "n_grid": list(self.n_grid),
            "algorithm": self.algorithm,
            "seeds": list(self.seeds),
            "sweep": asdict(self.sweep),
            "admm": asdict(self.admm),
            "outer": outer,
            "traces": self.traces,
            "timing": asdict(self.timing),
            "workers": self.workers,
            "output": self.output,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        if "scenario" in d:
            kw["scenario"] = Scenario.from_dict(d["scenario"] or {})
        if "n_grid" in d:
            grid = d["n_grid"]
            kw["n_grid"] = [grid] if isinstance(grid, int) else list(grid)
        elif "scenario" in kw:
            kw["n_grid"] = [kw["scenario"].n]
        if "seeds" in d:
            kw["seeds"] = _parse_seeds(d["seeds"])
        if "sweep" in d:
            kw["sweep"] = SweepSpec(**(d["sweep"] or {}))
        if "admm" in d:
            kw["admm"] = AdmmConfig(**(d["admm"] or {}))
        if "outer" in d:
            kw["outer"] = OuterConfig(**(d["outer"] or {}))
        if "timing" in d:
            kw["timing"] = TimingSpec(**(d["timing"] or {}))
        for key in ("algorithm", "traces", "workers", "output"):
            if key in d:
                kw[key] = d[key]
        return cls(**kw)


def _parse_seeds(spec) -> list:
    if isinstance(spec, int):
        return list(range(spec))
    if isinstance(spec, dict):
        start = int(spec.get("start", 0))
        return list(range(start, start + int(spec["count"])))
    return [int(s) for s in spec]


def load_config(path) -> ExperimentConfig:
    with Path(path).open() as fh:
        return ExperimentConfig.from_dict(yaml.safe_load(fh))


def apply_sweep_value(axis: str, value: float, scenario: Scenario,
                      admm: AdmmConfig) -> tuple[Scenario, AdmmConfig]:
    """Scenario and ADMM settings for one point of a sweep."""
    if axis == "none":
        return scenario, admm
    if axis == "rho":
        return scenario, AdmmConfig(**{**asdict(admm), "rho": value})
    if axis == "power":
        return scenario.replace(p_t_dbm=watts_to_dbm(value * 1e-3)), admm
    if axis == "distance":
        lo = scenario.id_range[0]
        if value < lo:
            raise ValueError(f"maximum distance {value} m below the inner radius {lo} m")
        return scenario.replace(id_range=(lo, value)), admm
    if axis == "alpha":
        return scenario.replace(alpha_id=value), admm
    raise ValueError(f"unknown sweep axis {axis!r}")
