import pytest
from hypothesis import settings

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True, print_blob=True)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def word_table():
    from anglemetric.heisenberg import word_table as build

    return build(22)


@pytest.fixture(scope="session")
def h3_word(word_table):
    from anglemetric.heisenberg import HeisenbergWordSpace

    return HeisenbergWordSpace(word_table)


@pytest.fixture(scope="session")
def h3_gauge():
    from anglemetric.heisenberg import HeisenbergGaugeSpace
    from anglemetric.lie.algebra import heisenberg3
    from anglemetric.lie.gauge import Gauge

    return HeisenbergGaugeSpace(Gauge(heisenberg3(), alpha=1.0))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
