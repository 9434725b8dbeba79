import sys
from pathlib import Path

import pytest

from cyclicbc.prooffmt import load_proof

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "cyclicbc" / "fixtures"
PROOFS = ("I", "R", "C", "E", "P", "A", "A_with_P")


def fixture_graph(name: str):
    return load_proof(FIXTURES / f"{name}.cbp")


@pytest.fixture
def fixture_dir():
    return FIXTURES


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
