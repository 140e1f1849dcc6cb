import pytest

from helpers import rectangle_outline
from ogmmerge.sim import corridor_scenario, simulate_pair


@pytest.fixture(scope="session")
def biased_scenario():
    return corridor_scenario(0, range_bias_sigma=0.05)


@pytest.fixture(scope="session")
def biased_pair(biased_scenario):
    return simulate_pair(biased_scenario)


@pytest.fixture(scope="session")
def outline():
    return rectangle_outline()


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
