import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphshift.graph import DynamicGraph  # noqa: E402


def random_graph(n, p, seed, k=1, assign_seed=None):
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    g = DynamicGraph.from_edges(edges, k=k, vertices=range(n))
    if assign_seed is not None:
        arng = random.Random(assign_seed)
        for v in g.vertices():
            g.assignment[v] = arng.randrange(k)
    return g


def brute_cut(edge_list, assignment):
    return sum(1 for u, v in edge_list if assignment[u] != assignment[v])


@pytest.fixture
def k4():
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    g = DynamicGraph.from_edges(edges, k=2)
    g.assignment.update({0: 0, 1: 0, 2: 1, 3: 1})
    return g


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number][1])
