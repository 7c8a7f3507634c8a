import pytest

from selrelay.chanmodel import NetworkConfig, db_to_linear

ACCEPTANCE_LINES = []


def equal_link(nr, db, direct=True):
    g = db_to_linear(db)
    return NetworkConfig(nr, g, g if direct else None)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def cfg10():
    return NetworkConfig(1, 10.0, 10.0)
