import sys

import numpy as np
import pytest

from yosida import catalog


@pytest.fixture(scope="session")
def wp():
    return catalog.build("weierstrass")


@pytest.fixture(scope="session")
def bk():
    return catalog.build("bank_kaufman")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
