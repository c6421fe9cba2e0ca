import numpy as np
import pytest

from qutrng import qutrit

_acceptance = []


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)


def random_state(rng):
    return qutrit.make_state(*(rng.normal(size=3) + 1j * rng.normal(size=3)))


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    _acceptance.append((report.nodeid.split("::")[-1], report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{outcome:7s} {name}")
