import numpy as np
import pytest
from hypothesis import strategies as st

from graphentropy import Distribution, FiniteGraph, SetSystem, cycle_graph, maximal_independent_sets

CRITERION_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture
def c5():
    return maximal_independent_sets(cycle_graph(5))


@pytest.fixture
def k2():
    return SetSystem.from_sets(Distribution.uniform(["1", "2"]), [["1"], ["2"]])


@st.composite
def graphs(draw, min_vertices=1, max_vertices=8, full_support=True):
    n = draw(st.integers(min_vertices, max_vertices))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [(str(i), str(j)) for (i, j), keep in zip(pairs, mask) if keep]
    lo = 0.05 if full_support else 0.0
    raw = draw(st.lists(st.floats(lo, 1.0), min_size=n, max_size=n))
    raw = np.array(raw) + (1e-3 if full_support else 0.0)
    if raw.sum() == 0:
        raw[0] = 1.0
    masses = raw / raw.sum()
    return FiniteGraph.build([str(i) for i in range(n)], edges, dict(zip(map(str, range(n)), masses)))
