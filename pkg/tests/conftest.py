import math

import pytest

from thermoweak import SelectionContext, ThermalGaussianProbe


@pytest.fixture
def probe():
    return ThermalGaussianProbe(sigma=1.0, mass=50.0, temperature=0.0)


@pytest.fixture
def reference_ctx():
    # A_w = 2.31 i at zeroth-order post-selection probability 1e-3
    return SelectionContext.from_weak_value(2.31j, 0.001)


@pytest.fixture
def phi_ctx():
    return SelectionContext.from_phi(math.atan(2.31))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
