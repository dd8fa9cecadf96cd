import itertools
import random

import pytest
from hypothesis import settings

from pottstm.graph import Graph, parse_graph
from pottstm.treedecomp import TreeDecomposition

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

EXAMPLE_TEXT = """9 12
0 2
0 1
1 3
3 7
7 8
8 4
4 6
6 5
5 2
2 3
3 4
4 2
"""

# the worked decomposition: left branch, two right branches, central triangle root
EXAMPLE_BAGS = ((0, 1, 2), (1, 2, 3), (2, 3, 4), (2, 4, 5), (4, 5, 6), (3, 4, 7), (4, 7, 8))
EXAMPLE_TREE = ((0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6))


@pytest.fixture
def example_graph() -> Graph:
    return parse_graph(EXAMPLE_TEXT)


@pytest.fixture
def example_td() -> TreeDecomposition:
    return TreeDecomposition(EXAMPLE_BAGS, EXAMPLE_TREE, root=2)


def connected_graphs(max_n=5):
    """Every connected labelled graph on 1..max_n vertices."""
    out = []
    for n in range(1, max_n + 1):
        pairs = list(itertools.combinations(range(n), 2))
        for mask in range(1 << len(pairs)):
            edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
            g = Graph(n, edges)
            if g.is_connected():
                out.append(g)
    return out


def random_graph(rng: random.Random, n: int, max_edges: int) -> Graph:
    pairs = list(itertools.combinations(range(n), 2))
    m = rng.randint(0, min(max_edges, len(pairs)))
    return Graph(n, rng.sample(pairs, m))


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph(n, list(itertools.combinations(range(n), 2)))


@pytest.fixture(scope="session")
def small_connected():
    return connected_graphs(5)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
