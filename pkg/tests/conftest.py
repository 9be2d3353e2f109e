import numpy as np
import pytest

from hfbkit.grid import make_grid

# acceptance lines collected during the session, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def grid1():
    return make_grid(1, 16, 10.0)


@pytest.fixture
def grid_odd():
    return make_grid(1, 9, 3.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
