import itertools
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"


def all_strings(n):
    return ("".join(bits) for bits in itertools.product("01", repeat=n))


@pytest.fixture
def data_dir(monkeypatch):
    monkeypatch.setenv("SSEA_DATA_DIR", str(DATA))
    return DATA


# verdict lines from test_acceptance.py, repeated in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
