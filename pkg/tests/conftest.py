import pytest
from hypothesis import HealthCheck, settings

from betaopt.dynamics import BetaParam

settings.register_profile(
    "default", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

CUBIC = (1, -2, -2, 2)


@pytest.fixture(scope="session")
def cubic():
    return BetaParam.from_polynomial(CUBIC)


@pytest.fixture(scope="session")
def golden():
    return BetaParam.golden()


@pytest.fixture(scope="session")
def two():
    return BetaParam.from_rational(2)


_criteria: list = []


@pytest.fixture
def criterion():
    """Record one acceptance line; returns the verdict so tests can assert on it."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
        _criteria.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)
