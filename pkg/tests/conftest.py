import pytest

from levels_lab.generators import GroupAction
from levels_lab.partition import Params, build_partition

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def params():
    return Params.with_defaults(0.5, k_max=12)


@pytest.fixture(scope="session")
def model(params):
    return build_partition(params)


@pytest.fixture(scope="session")
def action(model):
    return GroupAction(model)


@pytest.fixture(scope="session")
def small_action():
    return GroupAction(build_partition(Params.with_defaults(0.5, k_max=6)))


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
