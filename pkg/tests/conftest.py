import numpy as np
import pytest

from subtest.markov import MarkovChain

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def hybrid_chain(leak=0.1):
    """24-state expander-like block, one leaky state, one absorbing bad state."""
    block = 24
    rows = []
    for u in range(block):
        row = {v: 0.5 / block for v in range(block)}
        for s in (1, 5, 11):
            row[(u + s) % block] += 0.5 / 3
        rows.append(list(row.items()))
    rows.append([(v, (1 - leak) / block) for v in range(block)] + [(block + 1, leak)])
    rows.append([(block + 1, 1.0)])
    return MarkovChain(rows)


@pytest.fixture
def hybrid():
    return hybrid_chain()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
