import warnings

import pytest

from evanshock.evans import EvansSystem
from evanshock.model import ShockParams, solve_profile


@pytest.fixture(scope="session")
def monatomic_params():
    return ShockParams(5.0 / 3.0, 1e-4)


@pytest.fixture(scope="session")
def monatomic_system(monatomic_params):
    return EvansSystem(solve_profile(monatomic_params, 12.0), 12.0, 12.0)


@pytest.fixture(scope="session")
def weak_system():
    p = ShockParams(1.4, 0.5)
    return EvansSystem(solve_profile(p, 12.0), 12.0, 12.0)


@pytest.fixture(autouse=True)
def _strict_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
