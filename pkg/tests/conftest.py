import warnings

import numpy as np
import pytest

from vard import build_grid, make_constant_exponent


@pytest.fixture(scope="session")
def grid1d():
    return build_grid(1, "tensor", 6.0, 1024)


@pytest.fixture(scope="session")
def p2():
    return make_constant_exponent(2.0)


@pytest.fixture(scope="session")
def q4():
    return make_constant_exponent(4.0)


@pytest.fixture(scope="session")
def gauss(grid1d):
    x = grid1d.points[:, 0]
    return grid1d.field(np.exp(-x * x))


@pytest.fixture(autouse=True)
def _quiet_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        yield


_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """record(number, passed, detail) for the acceptance summary."""

    def record(number, passed, detail=""):
        _ACCEPTANCE[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}")
