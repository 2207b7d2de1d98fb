from functools import lru_cache

import pytest

from trih.cli import example_names, input_checks, parse_cycle_file, read_input
from trih.compactified import product_complex

SHIPPED = ["p1", "tropical_line", "weight2_line", "p2", "p1xp1", "blp2",
           "two_planes", "p1_x_line", "line_x_line"]
SMOOTH_COMPLETE = {"p1": (1, 1), "p2": (1, 1, 1), "p1xp1": (1, 2, 1)}


@lru_cache(maxsize=None)
def complex_of(name: str):
    spec = parse_cycle_file(read_input(f"example:{name}"))
    checks, x = input_checks(spec)
    assert x is not None, [c for c in checks if not c.passed]
    return x


@lru_cache(maxsize=None)
def product_of(a: str, b: str):
    return product_complex(complex_of(a), complex_of(b))


def pytest_collection_modifyitems(items):
    assert sorted(SHIPPED) == example_names()


@pytest.fixture(params=SHIPPED)
def shipped(request):
    return request.param, complex_of(request.param)


ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(n: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[n] = (title, passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[n]
        line = f"criterion {n:>2} {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f": {detail}" if detail else ""))
