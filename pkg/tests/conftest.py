import random

import pytest
from hypothesis import HealthCheck, settings

from artifact.exactalg import field_make
from artifact.exterior import AlternatingFunctional

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def F2():
    return field_make(2)


@pytest.fixture(scope="session")
def F3():
    return field_make(3)


def random_functional(n, F, rng, k=3):
    from math import comb

    while True:
        c = tuple(rng.randrange(F.q) for _ in range(comb(n, k)))
        if any(c):
            return AlternatingFunctional(n, k, F, c)


def random_invertible(n, F, rng):
    from artifact.exactalg import ExactMatrix, rank

    while True:
        M = [[rng.randrange(F.q) for _ in range(n)] for _ in range(n)]
        if rank(ExactMatrix(M, F)) == n:
            return M


# one line per acceptance criterion, echoed in the terminal summary so the
# verdicts show up even when output capture is on
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
