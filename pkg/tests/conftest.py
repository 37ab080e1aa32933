import pytest

from rieszlab.genfun import GeneratingFunction
from rieszlab.spectra import make_constant_shift, make_integers

# lines collected by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def integers_big():
    return make_integers(4096)


@pytest.fixture(scope="session")
def shift02():
    return make_constant_shift(0.2, 2**16)


@pytest.fixture(scope="session")
def g_integers(integers_big):
    return GeneratingFunction(integers_big)


@pytest.fixture(scope="session")
def g_shift02(shift02):
    return GeneratingFunction(shift02)
