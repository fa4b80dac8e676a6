import numpy as np
import pytest

from ibilab.basis import FrameLayout
from ibilab.channel import ChannelSpec, PathSpec, channel_matrix

# Monte-Carlo IBI energy per waveform (TD, N=8, L=5, D=2, one path at tau=0.5,
# 1e6 QPSK frames, seed 20240601) computed once and frozen here.
MC_LAYOUT = FrameLayout(5, 8, 2)
MC_SPEC = ChannelSpec((PathSpec(1.0, 0.5),), normalize_power=False)
MC_FROZEN_ENERGY = 0.030555841487452735


def monte_carlo_ibi(layout, spec, trials, seed, chunk=100_000):
    """Average per-sample IBI energy at the center block from random QPSK frames (TD basis)."""
    rng = np.random.default_rng(seed)
    H = channel_matrix(spec, layout.total_length)
    n, victim = layout.block_length, layout.num_blocks // 2
    rows = H[layout.block_start(victim) : layout.block_start(victim) + n]
    total = 0.0
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        x = np.zeros((m, layout.total_length), dtype=complex)
        for j in range(layout.num_blocks):
            if j == victim:
                continue
            s = layout.block_start(j)
            x[:, s : s + n] = (rng.choice([-1, 1], (m, n)) + 1j * rng.choice([-1, 1], (m, n))) / np.sqrt(2)
        total += np.sum(np.abs(x @ rows.T) ** 2)
    return total / trials / n


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
