import pytest
from hypothesis import HealthCheck, settings

from ctxlab.polytope import complete_logical_bell_set, noncontextual_polytope
from ctxlab.zoo import bell_cover

settings.register_profile("ctxlab", derandomize=True, deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ctxlab")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def bell_polytope():
    return noncontextual_polytope(bell_cover())


@pytest.fixture(scope="session")
def bell_logical_set(bell_polytope):
    return complete_logical_bell_set(bell_cover())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(".")[0].split()[-1])):
            terminalreporter.write_line(line)
