import numpy as np
import pytest

from hilbundle.grid import make_grid


@pytest.fixture(scope="session")
def grid1():
    return make_grid(1, 256, 40.0, 1.0)


@pytest.fixture(scope="session")
def grid2():
    return make_grid(2, 128, 20.0, 1.0)


@pytest.fixture(scope="session")
def small2():
    return make_grid(2, 64, 16.0, 1.0)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
