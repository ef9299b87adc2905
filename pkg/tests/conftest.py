import numpy as np
import pytest

from tsp_sparsify.tsplib import Instance, WeightKind


def explicit(matrix, name="explicit"):
    w = np.asarray(matrix, dtype=np.int64)
    return Instance(name, len(w), WeightKind.EXPLICIT, explicit_weights=w)


def from_pairs(n, pairs, default=0):
    """Explicit instance from {(u, v): weight} with 1-indexed vertices."""
    w = np.full((n, n), default, dtype=np.int64)
    np.fill_diagonal(w, 0)
    for (a, b), x in pairs.items():
        w[a - 1, b - 1] = w[b - 1, a - 1] = x
    return explicit(w)


@pytest.fixture
def k4_graded():
    # w(1,2)=1, w(2,3)=2, w(3,4)=3, w(1,3)=4, w(2,4)=5, w(1,4)=6
    return from_pairs(4, {(1, 2): 1, (2, 3): 2, (3, 4): 3, (1, 3): 4, (2, 4): 5, (1, 4): 6})


@pytest.fixture
def uniform():
    def make(n):
        return explicit(1 - np.eye(n, dtype=np.int64), name=f"uniform{n}")
    return make


@pytest.fixture
def rectangle():
    return Instance("rect", 4, WeightKind.EUC_2D, coords=[(0, 0), (0, 10), (20, 0), (20, 10)])


@pytest.fixture
def cheap_cycle5():
    """A 5-cycle of weight-1 edges; every chord costs 10, so the root LP is the tour."""
    pairs = {(i, i % 5 + 1): 1 for i in range(1, 6)}
    return from_pairs(5, pairs, default=10)


@pytest.fixture
def two_clusters():
    a = [(0, 0), (0, 10), (10, 0), (10, 10)]
    pts = a + [(x + 1000, y) for x, y in a]
    return Instance("clusters", 8, WeightKind.EUC_2D, coords=pts)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
