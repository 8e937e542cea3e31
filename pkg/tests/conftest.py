import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vessel_lab.curves import discretize_curve, make_curve
from vessel_lab.families import canonical_vessel, nls4_vessel, nls_vessel
from vessel_lab.params import sl_parameters
from vessel_lab.vessel import diag_vessel, rank1_vessel, zero_vessel

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("default")


@pytest.fixture(scope="session")
def rank1():
    return rank1_vessel()


@pytest.fixture(scope="session")
def zero():
    return zero_vessel()


@pytest.fixture(scope="session")
def diag():
    return diag_vessel()


@pytest.fixture(scope="session")
def curve8():
    return discretize_curve(make_curve(nodes=8), sl_parameters(), span=(0.0, 10.0))


@pytest.fixture(scope="session")
def nls():
    return nls_vessel()


@pytest.fixture(scope="session")
def nls4():
    return nls4_vessel()


@pytest.fixture(scope="session")
def canonical():
    return canonical_vessel()


@pytest.fixture(scope="session")
def sl_fixtures(rank1, diag, curve8):
    return {"rank1": rank1, "diag": diag, "curve8": curve8}


def rank1_tau(x):
    return 1 + x / 2 + np.sin(2 * x) / 4


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
