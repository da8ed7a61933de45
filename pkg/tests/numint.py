"""Numerical Fourier integration of the 1-bit control waveform (test-only)."""
import numpy as np

from trisswipt.tma import waveform


def fourier_integral(timing, f, points=2001):
    """(1/T) int_0^T s(t) e^{-j 2 pi f t} dt by trapezoid rule, split at the switching instants.

    The waveform is constant between switches, so each piece is sampled at
    its midpoint and only the smooth exponential is integrated numerically.
    """
    T = timing.period
    cuts = {0.0, T}
    for b in (timing.t_on, timing.t_on + timing.tau, timing.t_on + timing.tau - T):
        if 0 < b < T:
            cuts.add(b)
    cuts = sorted(cuts)
    total = 0j
    for a, b in zip(cuts, cuts[1:]):
        t = np.linspace(a, b, points)
        y = waveform(timing, 0.5 * (a + b)) * np.exp(-2j * np.pi * f * t)
        total += np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return total / T
