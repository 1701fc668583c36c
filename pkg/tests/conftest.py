import sys

import numpy as np
import pytest

from spectriples import (build_annulus_m1, build_ball_exterior_m1, build_halfline_m1,
                         build_interval_m1, build_interval_m2)


@pytest.fixture(scope="session")
def halfline():
    return build_halfline_m1(40.0, 4000, 1.0)


@pytest.fixture(scope="session")
def halfline_small():
    return build_halfline_m1(20.0, 800, 1.0)


@pytest.fixture(scope="session")
def interval():
    return build_interval_m1(1.0, 2000, 1.0)


@pytest.fixture(scope="session")
def interval_small():
    return build_interval_m1(1.0, 200, 1.0)


@pytest.fixture(scope="session")
def beam():
    return build_interval_m2(1.0, 200, 1.0)


@pytest.fixture(scope="session")
def annulus():
    return build_annulus_m1(1.0, 2.0, 400, 16, 1.0)


@pytest.fixture(scope="session")
def ball():
    return build_ball_exterior_m1(1.0, 8.0, 800, 6, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
