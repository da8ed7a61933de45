"""Time-modulated 1-bit control signals for the transmissive array.

Each transmit symbol A e^{j phi} is produced by a two-state (0 / pi) phase
switch whose 0-state starts at ``t_on`` and lasts ``tau`` within one control
period. The q-th Fourier harmonic of that waveform is

    c_q = (2 / (pi q)) sin(pi q tau / T) exp(-j pi q (2 t_on + tau) / T)

so the amplitude is set by ``tau`` and the phase by ``2 t_on + tau``. With
the timing rule below, ``c_{+1}`` carries A/A_max at phase -phi and its
mirror ``c_{-1}`` carries the symbol itself, (2/pi)(A/A_max) e^{+j phi}.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DEFAULT_PERIOD",
    "TmaSymbol",
    "TmaTiming",
    "symbol_to_timing",
    "waveform",
    "harmonic",
    "first_harmonic",
    "symbol_from_timing",
    "spectrum",
    "symbols_from_vector",
    "timing_table",
    "write_timing_csv",
]

DEFAULT_PERIOD = 3e-6


@dataclass(frozen=True)
class TmaSymbol:
    amplitude: float
    phase: float
    amplitude_max: float

    def __post_init__(self):
        if not self.amplitude_max > 0:
            raise ValueError("amplitude_max must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")


@dataclass(frozen=True)
class TmaTiming:
    t_on: float
    tau: float
    period: float = DEFAULT_PERIOD

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        if not 0 <= self.t_on < self.period:
            raise ValueError(f"t_on={self.t_on} outside [0, {self.period})")
        if not 0 <= self.tau <= self.period:
            raise ValueError(f"tau={self.tau} outside [0, {self.period}]")

    @property
    def wraps(self) -> bool:
        """True when the 0-state interval runs past the end of the period."""
        return self.t_on + self.tau > self.period


def _wrap_time(t: float, period: float) -> float:
    t = float(np.mod(t, period))
    # np.mod can round a tiny negative up to exactly `period`
    return 0.0 if t >= period else t


def symbol_to_timing(sym: TmaSymbol, period: float = DEFAULT_PERIOD,
                     mirrored: bool = False) -> TmaTiming:
    """Control timing whose positive first harmonic encodes ``sym``.

    ``tau`` takes the principal arcsine branch (tau <= T/2) unless
    ``mirrored``, which uses T - tau; both give the same harmonic magnitude.
    """
    if sym.amplitude > sym.amplitude_max:
        raise ValueError(
            f"amplitude {sym.amplitude} exceeds amplitude_max {sym.amplitude_max}")
    ratio = min(1.0, sym.amplitude / sym.amplitude_max)
    tau = period / np.pi * np.arcsin(ratio)
    if mirrored:
        tau = period - tau
    t_on = _wrap_time(0.5 * (sym.phase * period / np.pi - tau), period)
    return TmaTiming(t_on=t_on, tau=float(tau), period=period)


def waveform(timing: TmaTiming, t) -> np.ndarray:
    """Phase-switch state e^{j0} = +1 or e^{j pi} = -1 at times ``t`` (periodic)."""
    T = timing.period
    t = np.mod(np.asarray(t, dtype=float), T)
    if timing.tau >= T:
        return np.ones_like(t)
    if timing.tau <= 0:
        return -np.ones_like(t)
    start, stop = timing.t_on, timing.t_on + timing.tau
    if not timing.wraps:
        on = (t > start) & (t <= stop)
    else:
        # the pi-state is the gap left between the wrapped end and the start
        on = ~((t > stop - T) & (t <= start))
    return np.where(on, 1.0, -1.0)


def harmonic(timing: TmaTiming, q: int) -> complex:
    """Fourier-series coefficient of the waveform at frequency q/T."""
    T = timing.period
    if q == 0:
        return complex((2.0 * timing.tau - T) / T)
    mag = 2.0 / (np.pi * q) * np.sin(np.pi * q * timing.tau / T)
    return complex(mag * np.exp(-1j * np.pi * q * (2.0 * timing.t_on + timing.tau) / T))


def first_harmonic(timing: TmaTiming) -> complex:
    return harmonic(timing, 1)


def symbol_from_timing(timing: TmaTiming, amplitude_max: float = 1.0) -> TmaSymbol:
    """Invert the timing rule by reading the symbol off the q = -1 harmonic."""
    c = harmonic(timing, -1)
    amp = min(1.0, abs(c) * np.pi / 2.0) * amplitude_max
    return TmaSymbol(amplitude=amp, phase=float(np.mod(np.angle(c), 2 * np.pi)),
                     amplitude_max=amplitude_max)


def spectrum(timing: TmaTiming, f) -> np.ndarray:
    """Normalized Fourier integral (1/T) int_0^T s(t) e^{-j 2 pi f t} dt."""
    T = timing.period
    f = np.atleast_1d(np.asarray(f, dtype=float))
    out = np.empty(f.shape, complex)
    zero = f == 0
    out[zero] = (2.0 * timing.tau - T) / T
    fz = f[~zero]
    x = 2.0 * np.pi * fz * T
    # constant -1 background (case 1) or +1 background (case 2) over the period
    background = 1j * (1.0 - np.exp(-1j * x)) / x
    if not timing.wraps:
        width, sign = timing.tau, 1.0
        start = timing.t_on
    else:
        width, sign = T - timing.tau, -1.0
        start = timing.t_on + timing.tau - T
        background = -background
    pulse = (2.0 / (np.pi * fz * T)) * np.sin(np.pi * fz * width) \
        * np.exp(-1j * np.pi * fz * (2.0 * start + width))
    out[~zero] = sign * pulse + background
    return out if out.size > 1 else out.reshape(())


def symbols_from_vector(x: np.ndarray, amplitude_max: float | None = None) -> list[TmaSymbol]:
    """One symbol per array element; A_max defaults to the largest element magnitude."""
    x = np.asarray(x, complex).ravel()
    amax = float(np.max(np.abs(x))) if amplitude_max is None else float(amplitude_max)
    if amax <= 0:
        amax = 1.0
    return [TmaSymbol(float(abs(v)), float(np.mod(np.angle(v), 2 * np.pi)), amax) for v in x]


def timing_table(x: np.ndarray, period: float = DEFAULT_PERIOD,
                 amplitude_max: float | None = None, mirrored: bool = False) -> list[dict]:
    rows = []
    for n, sym in enumerate(symbols_from_vector(x, amplitude_max)):
        tm = symbol_to_timing(sym, period, mirrored)
        rows.append({"element": n, "amplitude": sym.amplitude, "phase": sym.phase,
                     "tau": tm.tau, "t_on": tm.t_on})
    return rows


def write_timing_csv(path, rows: list[dict]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["element", "amplitude", "phase", "tau", "t_on"])
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if k != "element" else v) for k, v in r.items()})
    return path
