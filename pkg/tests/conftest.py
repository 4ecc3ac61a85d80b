import sys

import pytest

from bhlab.polyarith import normalize_tuple, parse_tuple


def tup(text):
    return normalize_tuple(parse_tuple(text))


@pytest.fixture
def twin():
    return tup("X,X+2")


@pytest.fixture
def single():
    return tup("X")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
    missing = [n for n in range(1, 11) if n not in mod.RESULTS]
    for number in missing:
        terminalreporter.write_line(f"criterion {number:2d}: not run")
