import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures" / "oracle_values.json"


@pytest.fixture(scope="session")
def oracle():
    return json.loads(FIXTURES.read_text())


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
