from pathlib import Path

import pytest

from artifact.cpda import Cpda, parse_labeling
from artifact.hors import Scheme

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "artifact" / "fixtures"

_CRITERIA = []


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_scheme(name: str) -> Scheme:
    return Scheme.parse(fixture_path(name).read_text(encoding="utf-8"))


def load_cpda(name: str) -> Cpda:
    return Cpda.parse(fixture_path(name).read_text(encoding="utf-8"))


def load_labeling(name: str):
    return parse_labeling(fixture_path(name).read_text(encoding="utf-8"))


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL verdict for the acceptance summary."""

    def record(number, passed: bool, detail: str = ""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}" + (f" ({detail})" if detail else "")
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in _CRITERIA:
        terminalreporter.write_line(line)
