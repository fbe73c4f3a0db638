from pathlib import Path

import numpy as np
import pytest

from paramcmp.data import Dataset, build_frame, load_csv, set_panel

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture(scope="session")
def crime():
    return load_csv(FIXTURES / "crime.csv")


@pytest.fixture(scope="session")
def engel():
    return load_csv(FIXTURES / "engel1857.csv")


@pytest.fixture(scope="session")
def grunfeld():
    return set_panel(load_csv(FIXTURES / "grunfeld.csv"), "company", "year")


@pytest.fixture(scope="session")
def crime3(crime):
    return build_frame(crime, "crime", ["pctmetro", "pcths", "poverty"])


@pytest.fixture(scope="session")
def crime2(crime):
    return build_frame(crime, "crime", ["pctmetro", "pcths"])


@pytest.fixture(scope="session")
def grunfeld_frame(grunfeld):
    return build_frame(grunfeld, "invest", ["mvalue", "kstock"])


@pytest.fixture(scope="session")
def engel_frame(engel):
    return build_frame(engel, "foodexp", ["income"])


def make_frame(y, *cols, names=None):
    """ModelFrame from raw arrays (helper for synthetic tests)."""
    names = names or [f"x{i + 1}" for i in range(len(cols))]
    ds = Dataset.from_columns({"y": y, **dict(zip(names, cols))})
    return build_frame(ds, "y", names)


def make_panel(groups, times, y, *cols, names=None):
    names = names or [f"x{i + 1}" for i in range(len(cols))]
    ds = Dataset.from_columns({"g": groups, "t": times, "y": y, **dict(zip(names, cols))})
    ds = set_panel(ds, "g", "t")
    return ds, build_frame(ds, "y", names)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number, label, checks):
        failed = [name for name, ok in checks if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"[{status}] criterion {number:>2}: {label}"
        if failed:
            line += " (failed: " + "; ".join(failed) + ")"
        print(line)
        lines.append(line)
        assert not failed, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
