import pytest
from hypothesis import settings

from fiberid.physics import LinkBudget, SweepConfig

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

V = 2e8  # round group velocity used by the worked examples

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def v():
    return V


@pytest.fixture
def link0():
    """Reference link at zero distance with v = 2e8 m/s."""
    return LinkBudget(power_w=1e-3, distance_m=0.0, group_velocity_m_per_s=V)


@pytest.fixture
def sweep10():
    """10 GHz span, N = 100 bits for a 0.5 m pigtail at v = 2e8."""
    return SweepConfig(10e9, 1e-5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
