"""
Workloads do not see the partitioning
=====================================

Influence scores and maximal cliques come out the same whether vertices
migrate or not. Only the number of remote messages changes.
"""

import networkx as nx

from graphshift.engine import Engine
from graphshift.generators import PowerLawSpec, powerlaw_graph
from graphshift.heuristic import HeuristicConfig
from graphshift.partitioners import initial_partition
from graphshift.workloads import CliqueProgram, InfluenceProgram, collect_cliques


def run(program, adaptive, iterations):
    g = powerlaw_graph(PowerLawSpec(400, 4, 0.3, seed=2), k=4)
    g.assignment.update(initial_partition(g, "hsh"))
    eng = Engine(g, HeuristicConfig(seed=2), program, adaptive=adaptive)
    eng.run(max_iterations=iterations, until_converged=False)
    return g, eng


############################################################
# Influence: top five vertices and remote traffic with and without migration.

for adaptive in (False, True):
    g, eng = run(InfluenceProgram(0.5), adaptive, 60)
    top = sorted(eng.states, key=lambda v: -eng.states[v].score)[:5]
    remote = sum(r.messages_remote for r in eng.reports[-10:])
    print(f"adaptive={adaptive}: top {top}, remote messages in last 10 supersteps {remote}")

############################################################
# Cliques against networkx.

g, eng = run(CliqueProgram(), True, 2)
found = set(collect_cliques(eng.states))
expected = {frozenset(c) for c in nx.find_cliques(nx.Graph(list(g.edges()))) if len(c) >= 3}
print(f"{len(found)} maximal cliques of size >= 3; matches networkx: {found == expected}")
