import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hopfdde import DEMO_PARAMS, REFERENCE_PARAMS, char_coeffs, find_equilibrium, find_hopf_points  # noqa: E402


class Setup:
    def __init__(self, params):
        self.params = params
        self.eq = find_equilibrium(params)
        self.coeffs = char_coeffs(params, self.eq)
        self.search = find_hopf_points(self.coeffs)
        self.hopf = self.search.critical


@pytest.fixture(scope="session")
def ref():
    return Setup(REFERENCE_PARAMS)


@pytest.fixture(scope="session")
def demo():
    return Setup(DEMO_PARAMS)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
