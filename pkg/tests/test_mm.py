import numpy as np
import pytest
import stacked
from conftest import random_instance
from hypothesis import given, settings
from hypothesis import strategies as st

from trisswipt.mm import eh_quadratic, linearize_eh
from trisswipt.model import Beamformer, total_harvested
from trisswipt.wmmse import surrogate_state


def harvest_margin(x, state, budgets):
    """True EH constraint in the linearized sign convention: Q_t/zeta - x^H B10 x."""
    return budgets.q_t / budgets.zeta - eh_quadratic(x, state.e_block)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_tangency(seed):
    ch, bf, b = random_instance(seed, n=4, k=2, g=2)
    state = surrogate_state(bf, ch, b)
    lin = linearize_eh(bf, state, b)
    x0 = bf.all_beams
    assert lin.value(x0) == pytest.approx(harvest_margin(x0, state, b), rel=1e-10, abs=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_under_estimation(seed):
    ch, bf, b = random_instance(seed, n=4, k=2, g=2)
    state = surrogate_state(bf, ch, b)
    lin = linearize_eh(bf, state, b)
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        x = 2 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        # linear bound on the harvest never exceeds the true harvest
        assert lin.value(x) >= harvest_margin(x, state, b) - 1e-9


def test_zero_previous_iterate(small_instance):
    ch, _, b = small_instance
    zero = Beamformer.zeros(ch.k, ch.g, ch.n)
    state = surrogate_state(zero, ch, b)
    lin = linearize_eh(zero, state, b)
    assert np.all(lin.b4 == 0)
    assert lin.value(np.ones((3, 4))) == pytest.approx(b.q_t / b.zeta)


def test_matches_stacked_b10(small_instance):
    ch, bf, b = small_instance
    state = surrogate_state(bf, ch, b)
    lin = linearize_eh(bf, state, b)
    _, _, _, B10 = stacked.surrogate_matrices(state.beta, state.omega, state.scale, ch.h_id,
                                              ch.h_eh, b.sigma2, ch.k, ch.g, ch.n)
    x0 = bf.stacked()
    np.testing.assert_allclose(lin.b4.ravel(), B10 @ x0, atol=1e-12)
    assert lin.c3 == pytest.approx(-b.q_t / b.zeta - np.real(x0.conj() @ B10 @ x0))


def test_feasible_previous_stays_feasible(small_instance):
    ch, bf, b = small_instance
    b.q_t = 0.5 * total_harvested(bf, ch, b)
    state = surrogate_state(bf, ch, b)
    lin = linearize_eh(bf, state, b)
    assert lin.value(bf.all_beams) <= 0
    assert lin.threshold == pytest.approx(-lin.c3 / 2)


def test_eh_quadratic_relates_to_harvest(small_instance):
    ch, bf, b = small_instance
    state = surrogate_state(bf, ch, b)
    assert b.zeta * eh_quadratic(bf.stacked(), state.e_block) == pytest.approx(
        total_harvested(bf, ch, b), rel=1e-12)
