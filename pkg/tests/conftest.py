import pytest
from hypothesis import HealthCheck, settings

from abconvex.core import Grid1D, Grids

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grids():
    return Grids()


@pytest.fixture(scope="session")
def coarse():
    """Cheap grids for property tests."""
    return Grids(Grid1D(-3.0, 3.0, 0.01), Grid1D(-10.0, 10.0, 0.05))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
