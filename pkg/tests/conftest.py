import warnings

import pytest

from oamscatter.beams import ParaxialWarning

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def no_paraxial_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ParaxialWarning)
        yield
