"""Slow single-threaded re-implementation of the adaptive loop.

Built only from the scalar per-vertex functions so that it can check the
engine's vectorised decision path step by step.
"""
import numpy as np

from graphshift.heuristic import PartitionLedger, decide, enforce_quotas, partition_capacity


class RowDraws:
    def __init__(self, row):
        self._it = iter(row.tolist())

    def random(self):
        return next(self._it)


def reference_run(graph, s, alpha, seed, iterations, tie_break="random"):
    """Return the per-iteration committed counts and final assignment."""
    k = graph.k
    cap = partition_capacity(graph.num_vertices, k, alpha)
    assignment = dict(graph.assignment)
    in_flight = {}  # vertex -> (source, destination)
    commits = []
    for t in range(1, iterations + 1):
        ids = sorted(graph.vertices())
        draws = np.random.default_rng([seed, t]).random((len(ids), 2))
        view = dict(assignment)
        for v, (_, dst) in in_flight.items():
            view[v] = dst
        sizes = [0] * k
        for p in assignment.values():
            sizes[p] += 1
        pending = [0] * k
        for src, dst in in_flight.values():
            pending[dst] += 1
            pending[src] -= 1
        ledger = PartitionLedger([cap] * k, sizes, pending)
        decisions = []
        for i, v in enumerate(ids):
            rng = RowDraws(draws[i])
            if v in in_flight:
                continue
            d = decide(v, graph, ledger, rng, s, assignment=view, tie_break=tie_break)
            if d is not None:
                decisions.append(d)
        admitted, _ = enforce_quotas(decisions, ledger)
        for v, (_, dst) in in_flight.items():
            assignment[v] = dst
        commits.append(len(in_flight))
        in_flight = {d.vertex: (d.source, d.destination) for d in admitted}
    return commits, assignment
