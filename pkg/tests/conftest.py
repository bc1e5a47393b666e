import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from kelvinwaves.geometry import Ellipsoid
from kelvinwaves.model import PhysicalConfig

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def aligned():
    """Aligned rotation, N = 2, f = 1."""
    return PhysicalConfig.aligned_case(2.0, 1.0)


@pytest.fixture
def tilted():
    return PhysicalConfig((0.1, 0.0, 0.5), 2.0)


@pytest.fixture
def sphere():
    return Ellipsoid((1.0, 1.0, 1.0))


@pytest.fixture
def triaxial():
    return Ellipsoid((1.0, 0.86, 0.57))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record a one-line verdict for an acceptance criterion."""

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
