import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lie_integrate.catalog import entry_names, get_entry

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CATALOG = entry_names()


def coords(dim, bound=1.0):
    """Vectors with entries in [-bound, bound]."""
    return arrays(np.float64, dim, elements=st.floats(-bound, bound, allow_nan=False, width=64))


def ball(dim, radius):
    """Vectors of norm at most ``radius`` (rescaled when a draw falls outside)."""
    def clip(v):
        n = np.linalg.norm(v)
        return v if n <= radius else v * (radius / n)
    return coords(dim, radius).map(clip)


@pytest.fixture(scope="session")
def so3():
    return get_entry("so3")


@pytest.fixture(scope="session")
def heis():
    return get_entry("heisenberg3")


@pytest.fixture(scope="session")
def sl2():
    return get_entry("sl2")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
