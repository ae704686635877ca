import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from billiardlab.curves import EllipseBody, SupportBody, SupportCurve, disc  # noqa: E402


@pytest.fixture(scope="session")
def circle():
    return disc(1.0).boundary()


@pytest.fixture(scope="session")
def ellipse():
    return EllipseBody(2.0, 1.0).boundary()


@pytest.fixture(scope="session")
def eightfold():
    """Convex 8-fold body ``h = 1 + 0.01 cos 8 psi``."""
    return SupportCurve(1.0, [0.0] * 7 + [0.01])


@pytest.fixture(scope="session")
def fourfold():
    return SupportCurve(1.0, [0.0, 0.0, 0.0, 0.05])


@pytest.fixture(scope="session")
def eightfold_body(eightfold):
    return SupportBody(eightfold)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
