"""Greedy vertex migration with probability gating, capacity quotas and
convergence detection.

Scalar functions (:func:`candidate_partitions`, :func:`decide`,
:func:`enforce_quotas`) work one vertex or decision at a time. The engine
uses the array versions (:func:`propose_migrations`, :func:`admit_by_quota`)
which implement the same rules over a CSR snapshot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import neighbour_partition_histogram


@dataclass
class HeuristicConfig:
    s: float = 0.5
    alpha: float = 1.2
    window: int = 30
    seed: int = 0
    tie_break: str = "random"

    def __post_init__(self):
        if self.tie_break not in ("random", "lowest"):
            raise ValueError("tie_break must be 'random' or 'lowest'")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError("s must lie in [0, 1]")
        if self.alpha < 1.0:
            raise ValueError("alpha must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")


def partition_capacity(num_vertices: int, k: int, alpha: float) -> int:
    """Per-partition vertex cap: ``floor(alpha * |V| / k)``, never below ``ceil(|V| / k)``."""
    if num_vertices == 0:
        return 0
    return max(math.floor(alpha * num_vertices / k + 1e-9), math.ceil(num_vertices / k))


@dataclass
class PartitionLedger:
    """Capacities and sizes per partition.

    ``pending`` is the net announced inflow not yet committed; it is
    reserved when computing remaining capacity and quotas.
    """

    capacity: list[int]
    size: list[int]
    pending: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.pending:
            self.pending = [0] * len(self.capacity)

    @classmethod
    def uniform(cls, sizes, capacity):
        return cls([capacity] * len(sizes), list(sizes))

    @property
    def k(self) -> int:
        return len(self.capacity)

    def remaining(self, i: int) -> int:
        return max(0, self.capacity[i] - self.size[i] - self.pending[i])

    def quota(self, i: int, j: int) -> int:
        """Max migrations from ``i`` to ``j`` this iteration: ``floor(C_j(t) / (k - 1))``."""
        if i == j or self.k < 2:
            return 0
        return self.remaining(j) // (self.k - 1)

    def quota_matrix(self) -> np.ndarray:
        k = self.k
        q = np.zeros((k, k), dtype=np.int64)
        if k >= 2:
            rem = np.array([self.remaining(j) for j in range(k)], dtype=np.int64)
            q[:] = rem // (k - 1)
            np.fill_diagonal(q, 0)
        return q


@dataclass(frozen=True, order=True)
class MigrationDecision:
    vertex: int
    source: int
    destination: int
    gain: int


def candidate_partitions(v, graph, assignment=None) -> set[int]:
    """Partitions holding ``v`` or at least one of its neighbours."""
    a = graph.assignment if assignment is None else assignment
    out = {a[v]}
    out.update(a[w] for w in graph.neighbours(v))
    return out


def _open_destinations(ledger, source):
    if ledger is None:
        return None
    return {j for j in range(ledger.k) if ledger.quota(source, j) > 0}


def greedy_destination(v, graph, assignment=None, ledger=None, tie_draw=None):
    """Return ``(destination, gain)`` or None when ``v`` should stay.

    Only partitions with a positive quota from v's partition are eligible
    when a ledger is given. The current partition wins ties; other tied
    partitions are picked by ``tie_draw`` in [0, 1) over their sorted ids,
    or the lowest id when ``tie_draw`` is None.
    """
    a = graph.assignment if assignment is None else assignment
    hist = neighbour_partition_histogram(graph, v, a)
    here = a[v]
    allowed = _open_destinations(ledger, here)
    if allowed is not None:
        hist = {p: c for p, c in hist.items() if p in allowed or p == here}
    if not hist:
        return None
    own = hist.get(here, 0)
    best = max(hist.values())
    if own >= best:
        return None
    tied = sorted(p for p, c in hist.items() if c == best)
    pick = 0 if tie_draw is None else min(int(tie_draw * len(tied)), len(tied) - 1)
    return tied[pick], best - own


def decide(v, graph, ledger, rng, s=0.5, assignment=None, tie_break="random"):
    """One gated migration decision; returns a MigrationDecision or None (stay).

    Draws one uniform from ``rng`` for the gate and, if the vertex passes
    it and ``tie_break`` is ``"random"``, a second one for tie-breaking.
    """
    if not rng.random() < s:
        return None
    tie_draw = rng.random() if tie_break == "random" else None
    found = greedy_destination(v, graph, assignment, ledger, tie_draw)
    if found is None:
        return None
    a = graph.assignment if assignment is None else assignment
    return MigrationDecision(v, a[v], found[0], found[1])


def enforce_quotas(decisions, ledger: PartitionLedger):
    """Split decisions into (admitted, deferred) under per-pair quotas.

    Within a pair, higher gain is admitted first, then lower vertex id.
    """
    used: dict[tuple[int, int], int] = {}
    admitted, deferred = [], []
    for d in sorted(decisions, key=lambda d: (-d.gain, d.vertex)):
        pair = (d.source, d.destination)
        n = used.get(pair, 0)
        if n < ledger.quota(*pair):
            used[pair] = n + 1
            admitted.append(d)
        else:
            deferred.append(d)
    return admitted, deferred


class ConvergenceWindow:
    """Tracks consecutive iterations without committed migrations."""

    def __init__(self, window: int = 30):
        self.window = window
        self.quiet = 0

    def update(self, migrations: int) -> bool:
        self.quiet = self.quiet + 1 if migrations == 0 else 0
        return self.converged

    @property
    def converged(self) -> bool:
        return self.quiet >= self.window

    def reset(self):
        self.quiet = 0


def update_convergence(state: ConvergenceWindow, migrations: int) -> bool:
    return state.update(migrations)


# -- array versions used by the engine ------------------------------------

def neighbour_counts(indptr, indices, part, k) -> np.ndarray:
    """(n, k) matrix of neighbour counts per partition."""
    n = len(indptr) - 1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    flat = np.bincount(rows * k + part[indices], minlength=n * k)
    return flat.reshape(n, k)


def propose_migrations(indptr, indices, part, k, gate, allowed=None, tie_draws=None):
    """Vectorised :func:`greedy_destination` for vertices where ``gate`` is true.

    ``allowed`` is a length-k mask of open destinations; ``tie_draws`` holds
    one uniform per vertex (None picks the lowest tied id). Returns
    ``(rows, destinations, gains)``.
    """
    n = len(part)
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    counts = neighbour_counts(indptr, indices, part, k)
    idx = np.arange(n)
    own = counts[idx, part]
    if allowed is not None:
        counts = np.where(np.asarray(allowed, dtype=bool)[None, :], counts, -1)
        counts[idx, part] = own
    top = counts.max(axis=1)
    move = gate & (top > own)
    rows = np.flatnonzero(move)
    ties = counts[rows] == top[rows, None]
    if tie_draws is None:
        best = ties.argmax(axis=1)
    else:
        n_ties = ties.sum(axis=1)
        pick = np.minimum((tie_draws[rows] * n_ties).astype(np.int64), n_ties - 1)
        best = (ties & (np.cumsum(ties, axis=1) == (pick + 1)[:, None])).argmax(axis=1)
    return rows, best, (top - own)[rows]


def admit_by_quota(src, dst, gain, vid, quotas):
    """Boolean mask of admitted proposals; same ordering rule as :func:`enforce_quotas`."""
    n = len(src)
    if n == 0:
        return np.zeros(0, dtype=bool)
    order = np.lexsort((vid, -gain, dst, src))
    s, d = src[order], dst[order]
    new_group = np.ones(n, dtype=bool)
    new_group[1:] = (s[1:] != s[:-1]) | (d[1:] != d[:-1])
    starts = np.flatnonzero(new_group)
    group_start = starts[np.cumsum(new_group) - 1]
    rank = np.arange(n) - group_start
    ok_sorted = rank < quotas[s, d]
    ok = np.empty(n, dtype=bool)
    ok[order] = ok_sorted
    return ok
