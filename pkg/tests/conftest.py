import itertools

import numpy as np
import pytest


def brute_force_states(N, m):
    """All occupation vectors of m bosons in N levels by exhaustive product search."""
    return [s for s in itertools.product(range(m + 1), repeat=N) if sum(s) == m]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
