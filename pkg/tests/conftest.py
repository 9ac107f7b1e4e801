import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from artifact.fixtures import load_fixture

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion number -> (ok, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def vacuum():
    return load_fixture("vacuum")


@pytest.fixture(scope="session")
def genus1():
    return load_fixture("genus1")


@pytest.fixture(scope="session")
def helicoid():
    return load_fixture("helicoid")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
