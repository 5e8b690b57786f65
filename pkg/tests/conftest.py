import pytest

from helicoidal import period_solver as ps

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def solved_one():
    return ps.solve_period_problem(1.0)


@pytest.fixture(scope="session")
def solved_generic():
    return ps.solved_from_params(0.5, 2.0, 0.5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
