import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bbkit.funcgrid import Grid, library_function

settings.register_profile(
    "bbkit",
    deadline=None,
    max_examples=int(os.environ.get("BBKIT_HYPOTHESIS_EXAMPLES", "25")),
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("bbkit")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid256():
    return Grid.from_extent(1, 256, 8.0)


@pytest.fixture(scope="session")
def g256(grid256):
    return library_function("gaussian", {}, grid256)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
