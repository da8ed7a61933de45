import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trisswipt.channel import ChannelSet  # noqa: E402
from trisswipt.model import Beamformer, SystemBudgets  # noqa: E402


def random_instance(seed, n=4, k=2, g=1, p_t=1.0, q_t=0.1, zeta=0.7):
    """Small instance with unit-scale channels and a random beamformer."""
    rng = np.random.default_rng(seed)

    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    ch = ChannelSet(cn(k, n), cn(g, n))
    bf = Beamformer(cn(k, n), cn(g, n))
    budgets = SystemBudgets(p_t=p_t, q_t=q_t, sigma2=rng.uniform(0.1, 1.0, k), zeta=zeta,
                            weights=rng.uniform(0.5, 2.0, k))
    return ch, bf, budgets


@pytest.fixture
def small_instance():
    return random_instance(0)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for name, mod in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance" and getattr(mod, "RESULTS", None):
            lines = [mod.RESULTS[k] for k in sorted(mod.RESULTS)]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
