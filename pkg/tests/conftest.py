from fractions import Fraction

import pytest

from pacman_decomp.corpus import corpus


@pytest.fixture(scope="session")
def measures():
    return corpus()


P_GRID = [Fraction(k, 10) for k in range(1, 10)]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
