import csv
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def load_reference_tables():
    rows = []
    with open(DATA / "reference_tables.csv", newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {k: float(v) for k, v in raw.items() if k not in ("policy", "retrials")}
            row["policy"] = raw["policy"]
            row["retrials"] = raw["retrials"] == "1"
            rows.append(row)
    return rows


@pytest.fixture(scope="session")
def reference_tables():
    return load_reference_tables()


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    """Collects one PASS/FAIL line per acceptance criterion for the summary."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
        print(line)
        lines.append((number, line))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
