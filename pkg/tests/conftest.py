import logging
from pathlib import Path

import pytest

from irlscut import ingest, read_graph

DATA = Path(__file__).parent / "data"

# Exact min-cut values of the shipped fixtures, computed once with
# networkx.minimum_cut on the symmetric directed expansion and frozen here.
FIXTURE_OPTIMA = {
    "cycle4.txt": 2.0,
    "geometric200.max": 58.70622297963746,
    "grid10_sides.max": 13.6203173798558,
    "grid12_corners.max": 1.3862852539808679,
    "grid20_weighted.max": 46.5378085472525,
    "grid3d6_sides.max": 50.95709601029751,
    "path3.txt": 1.0,
    "triangle.txt": 1.5,
}
GRID100_OPTIMUM = 205.55502512577732  # grid2d(100, 100, terminals="weighted", seed=0)

FIXTURES = sorted(FIXTURE_OPTIMA)

ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_warnings(caplog):
    caplog.set_level(logging.ERROR, logger="irlscut")


@pytest.fixture
def path3():
    """s - a - t with c(s,a) = 2, c(a,t) = 1."""
    return ingest([("s", "a", 2.0), ("a", "t", 1.0)], "s", "t")


@pytest.fixture
def triangle():
    return ingest([("s", "a", 1.0), ("a", "t", 1.0), ("s", "t", 0.5)], "s", "t")


@pytest.fixture
def cycle4():
    return ingest([("s", "a", 1.0), ("a", "t", 1.0), ("t", "b", 1.0), ("b", "s", 1.0)],
                  "s", "t")


def load_fixture(name):
    return read_graph(DATA / name)
