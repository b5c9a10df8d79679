import functools

import pytest

from cpwalk.complex import constant_degree_ball, hex_ball
from cpwalk.packing import euclidean_packing, solve_max_disc


@functools.lru_cache(maxsize=None)
def hex_regular(n: int):
    """Regular hexagonal packing of hex_ball(n), unit radii."""
    cx = hex_ball(n)
    return cx, euclidean_packing(cx, 1.0)


@functools.lru_cache(maxsize=None)
def max_disc(family: str, n: int):
    cx = hex_ball(n) if family == "hex" else constant_degree_ball(7, n)
    return cx, solve_max_disc(cx, tol=1e-10)


@pytest.fixture(scope="session")
def hex3():
    return hex_regular(3)


@pytest.fixture(scope="session")
def deg7_disc():
    return {n: max_disc("deg7", n) for n in range(3, 8)}


# one "criterion k PASS|FAIL ..." line per acceptance test, shown in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
