from pathlib import Path

import pytest

from sizereason.inheritance import parse_diagram
from sizereason.prefstruct import parse_structure

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

ACCEPTANCE_RESULTS: dict[str, str] = {}
REPORTS: list[str] = []


def report(line: str) -> None:
    """Record an observation that is shown after the run but not asserted."""
    REPORTS.append(line)


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_structure(name: str):
    return parse_structure((FIXTURES / f"{name}.txt").read_text())


def load_diagram(name: str):
    return parse_diagram((FIXTURES / f"{name}.txt").read_text())


@pytest.fixture
def absolute():
    return load_structure("absolute")


@pytest.fixture
def non_trans():
    return load_structure("non_trans")


@pytest.fixture
def trans_no_rank():
    return load_structure("trans_no_rank")


def pytest_terminal_summary(terminalreporter):
    if REPORTS:
        terminalreporter.section("observations")
        for line in REPORTS:
            terminalreporter.write_line(line)
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(ACCEPTANCE_RESULTS[key])
