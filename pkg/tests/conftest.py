import random

import pytest
from hypothesis import HealthCheck, settings

from bgpa import builders
from bgpa.boxes import BoxElement
from bgpa.graph import enumerate_paths

settings.register_profile(
    "bgpa", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("bgpa")


@pytest.fixture(scope="session")
def diag_z2():
    return builders.diagonal("Z2")


@pytest.fixture(scope="session")
def bh():
    return builders.bh_s3()


@pytest.fixture(scope="session")
def multi3():
    return builders.multi_edge(3, with_group=True)


@pytest.fixture(scope="session")
def tree6():
    return builders.biregular_tree(3, 3, 6)


def random_box(g, n, sign, rng: random.Random, lo: int = -3, hi: int = 3):
    """Random element of P_n^sign with small integer entries."""
    ps = enumerate_paths(g, n, sign)
    # plain ints keep products fast; the library divides exactly via inv()
    return BoxElement(g, n, sign, {ab: rng.randint(lo, hi) for ab in ps.st_pairs})


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[0].split()[-1])):
            terminalreporter.write_line(line)
