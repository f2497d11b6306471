import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fastcontrol.spectral import heat_spectrum, periodic_kdv_spectrum

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def heat8():
    return heat_spectrum(8)


@pytest.fixture(scope="session")
def heat6():
    return heat_spectrum(6)


@pytest.fixture(scope="session")
def kdv8():
    return periodic_kdv_spectrum(2 * math.pi, 8)


@pytest.fixture(scope="session")
def kdv6():
    return periodic_kdv_spectrum(2 * math.pi, 6)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
