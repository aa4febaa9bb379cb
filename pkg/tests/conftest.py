import numpy as np
import pytest

# Heisenberg-limited CFIM of the four-node ring at unit visibility
EQ5 = np.array([
    [0.50, 0.25, 0.00, 0.25],
    [0.25, 0.50, 0.25, 0.00],
    [0.00, 0.25, 0.50, 0.25],
    [0.25, 0.00, 0.25, 0.50],
])
AVG = np.full(4, 0.25)
ALT = np.array([1.0, -1.0, 1.0, -1.0]) / 2.0

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def eq5():
    return EQ5.copy()


def random_psd(rng, m, rank=None):
    rank = m if rank is None else rank
    g = rng.normal(size=(m, rank))
    return g @ g.T


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
