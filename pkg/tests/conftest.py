import numpy as np
import pytest

from irs_csi.channel import RfParams
from irs_csi.geometry import IrsLayout, place_rus


@pytest.fixture(scope="session")
def layout():
    return IrsLayout()


@pytest.fixture(scope="session")
def rf():
    return RfParams()


@pytest.fixture(scope="session")
def rus_set(layout):
    return place_rus(layout, 5, 4, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
