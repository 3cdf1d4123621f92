import pytest
from hypothesis import settings

from lcprop.grammar import load_grammar_file
from support import DATA

settings.register_profile("repo", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("repo")

# filled by the acceptance module, printed after the run
ACCEPTANCE_LINES: dict = {}


@pytest.fixture(scope="session")
def possessive():
    return load_grammar_file(DATA / "possessive.gram")


@pytest.fixture(scope="session")
def agreement():
    return load_grammar_file(DATA / "agreement.gram")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[name])
