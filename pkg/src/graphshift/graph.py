"""Dynamic undirected graph with per-vertex partition assignment.

The graph owns topology (vertices, symmetric adjacency) and the current
partition of every vertex. Topology mutations are queued as
:class:`ChangeEvent` objects in a :class:`ChangeBuffer` and applied at
iteration barriers by :func:`apply_changes`.
"""
from __future__ import annotations

import enum
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np


class GraphError(Exception):
    """Raised on caller bugs such as querying an unknown vertex."""


class ChangeKind(enum.Enum):
    ADD_VERTEX = "AV"
    REMOVE_VERTEX = "RV"
    ADD_EDGE = "AE"
    REMOVE_EDGE = "RE"


@dataclass(frozen=True)
class ChangeEvent:
    kind: ChangeKind
    u: int
    v: int | None = None
    seq: int = 0

    @classmethod
    def add_vertex(cls, u, seq=0):
        return cls(ChangeKind.ADD_VERTEX, int(u), None, seq)

    @classmethod
    def remove_vertex(cls, u, seq=0):
        return cls(ChangeKind.REMOVE_VERTEX, int(u), None, seq)

    @classmethod
    def add_edge(cls, u, v, seq=0):
        return cls(ChangeKind.ADD_EDGE, int(u), int(v), seq)

    @classmethod
    def remove_edge(cls, u, v, seq=0):
        return cls(ChangeKind.REMOVE_EDGE, int(u), int(v), seq)


class ChangeBuffer:
    """FIFO of pending topology changes, flushed every ``flush_every`` iterations."""

    def __init__(self, flush_every: int = 1):
        if flush_every < 1:
            raise ValueError("flush_every must be >= 1")
        self.flush_every = flush_every
        self._queue: deque[ChangeEvent] = deque()
        self._seq = 0

    def push(self, event: ChangeEvent) -> None:
        self._queue.append(
            ChangeEvent(event.kind, event.u, event.v, self._seq))
        self._seq += 1

    def extend(self, events: Iterable[ChangeEvent]) -> None:
        for event in events:
            self.push(event)

    def due(self, iteration: int) -> bool:
        return iteration % self.flush_every == 0

    def drain(self) -> list[ChangeEvent]:
        events = list(self._queue)
        self._queue.clear()
        return events

    def __len__(self):
        return len(self._queue)

    def __iter__(self) -> Iterator[ChangeEvent]:
        return iter(self._queue)


@dataclass
class FlushSummary:
    applied: int = 0
    skipped: int = 0
    added_vertices: list[int] = field(default_factory=list)
    removed_vertices: list[int] = field(default_factory=list)
    affected: list[int] = field(default_factory=list)


@dataclass
class CSRView:
    """Immutable array view of the topology, indexed by sorted vertex id."""

    ids: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def rows(self) -> np.ndarray:
        return np.repeat(np.arange(len(self.ids)), np.diff(self.indptr))

    def position(self, v) -> int:
        i = int(np.searchsorted(self.ids, v))
        if i >= len(self.ids) or self.ids[i] != v:
            raise GraphError(f"unknown vertex {v}")
        return i


class DynamicGraph:
    """Undirected simple graph with a partition id for every vertex."""

    def __init__(self, k: int = 1):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.adj: dict[int, set[int]] = {}
        self.assignment: dict[int, int] = {}
        self.num_edges = 0
        self.version = 0
        self._csr: CSRView | None = None
        self._csr_version = -1
        self._retired: set[int] = set()

    @classmethod
    def from_edges(cls, edges, k=1, vertices=None, placer=None):
        g = cls(k)
        placer = placer or (lambda v: 0)
        for v in vertices or ():
            g.add_vertex(v, placer(v))
        for u, v in edges:
            for w in (u, v):
                if w not in g.adj:
                    g.add_vertex(w, placer(w))
            g.add_edge(u, v)
        return g

    def copy(self) -> "DynamicGraph":
        g = DynamicGraph(self.k)
        g.adj = {v: set(n) for v, n in self.adj.items()}
        g.assignment = dict(self.assignment)
        g.num_edges = self.num_edges
        g._retired = set(self._retired)
        return g

    def __contains__(self, v) -> bool:
        return v in self.adj

    def __len__(self) -> int:
        return len(self.adj)

    @property
    def num_vertices(self) -> int:
        return len(self.adj)

    def vertices(self):
        return self.adj.keys()

    def neighbours(self, v) -> set[int]:
        try:
            return self.adj[v]
        except KeyError:
            raise GraphError(f"unknown vertex {v}") from None

    def degree(self, v) -> int:
        return len(self.neighbours(v))

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, nbrs in self.adj.items():
            for v in nbrs:
                if u < v:
                    yield u, v

    def add_vertex(self, v, partition=0) -> bool:
        v = int(v)
        if v in self.adj:
            return False
        if v in self._retired:
            raise GraphError(f"vertex id {v} was deleted and cannot be reused")
        if not 0 <= partition < self.k:
            raise GraphError(f"partition {partition} outside [0, {self.k})")
        self.adj[v] = set()
        self.assignment[v] = partition
        self.version += 1
        return True

    def remove_vertex(self, v) -> int:
        """Remove ``v`` and its incident edges; return the number of edges removed."""
        nbrs = self.adj.pop(v)
        for w in nbrs:
            self.adj[w].discard(v)
        del self.assignment[v]
        self.num_edges -= len(nbrs)
        self._retired.add(v)
        self.version += 1
        return len(nbrs)

    def add_edge(self, u, v) -> bool:
        if u == v:
            raise GraphError("self-loops are not allowed")
        if u not in self.adj or v not in self.adj:
            raise GraphError(f"edge ({u}, {v}) references an unknown vertex")
        if v in self.adj[u]:
            return False
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.num_edges += 1
        self.version += 1
        return True

    def remove_edge(self, u, v) -> bool:
        if u not in self.adj or v not in self.adj[u]:
            return False
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self.num_edges -= 1
        self.version += 1
        return True

    def partition_sizes(self) -> list[int]:
        sizes = [0] * self.k
        for p in self.assignment.values():
            sizes[p] += 1
        return sizes

    def members(self, partition) -> set[int]:
        return {v for v, p in self.assignment.items() if p == partition}

    def csr(self) -> CSRView:
        """Sorted-id CSR snapshot, cached until the topology changes."""
        if self._csr is None or self._csr_version != self.version:
            ids = np.array(sorted(self.adj), dtype=np.int64)
            pos = {v: i for i, v in enumerate(ids.tolist())}
            counts = np.fromiter((len(self.adj[v]) for v in ids.tolist()),
                                 dtype=np.int64, count=len(ids))
            indptr = np.zeros(len(ids) + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            indices = np.fromiter(
                (pos[w] for v in ids.tolist() for w in sorted(self.adj[v])),
                dtype=np.int64, count=int(indptr[-1]))
            self._csr = CSRView(ids, indptr, indices)
            self._csr_version = self.version
        return self._csr

    def check_invariants(self) -> None:
        """Assert symmetry, simple-graph and partition-cover properties."""
        count = 0
        for u, nbrs in self.adj.items():
            assert u not in nbrs, f"self-loop at {u}"
            for v in nbrs:
                assert u in self.adj.get(v, ()), f"asymmetric edge ({u}, {v})"
            count += len(nbrs)
        assert count == 2 * self.num_edges, "edge counter out of sync"
        assert self.assignment.keys() == self.adj.keys(), "assignment does not cover V"
        assert all(0 <= p < self.k for p in self.assignment.values())


def hash_placer(k: int) -> Callable[[int], int]:
    from .partitioners import hash_partition
    return lambda v: hash_partition(v, k)


def apply_changes(graph: DynamicGraph, buffer: ChangeBuffer | Iterable[ChangeEvent],
                  placer: Callable[[int], int] | None = None,
                  summary: FlushSummary | None = None) -> list[int]:
    """Apply buffered events in arrival order; return the affected vertices.

    Duplicate additions are idempotent. Removals of absent elements and
    self-loop additions are skipped and counted in ``summary.skipped``.
    An AddEdge naming an unseen endpoint creates that vertex first.
    """
    placer = placer or hash_placer(graph.k)
    summary = summary if summary is not None else FlushSummary()
    events = buffer.drain() if isinstance(buffer, ChangeBuffer) else list(buffer)
    affected: dict[int, None] = {}

    def ensure(v):
        if v not in graph:
            if v in graph._retired:
                return False
            graph.add_vertex(v, placer(v))
            summary.added_vertices.append(v)
        affected[v] = None
        return True

    for ev in events:
        if ev.kind is ChangeKind.ADD_VERTEX:
            if ev.u in graph._retired:
                summary.skipped += 1
                continue
            ensure(ev.u)
        elif ev.kind is ChangeKind.REMOVE_VERTEX:
            if ev.u not in graph:
                summary.skipped += 1
                continue
            for w in graph.adj[ev.u]:
                affected[w] = None
            graph.remove_vertex(ev.u)
            affected.pop(ev.u, None)
            summary.removed_vertices.append(ev.u)
        elif ev.kind is ChangeKind.ADD_EDGE:
            if ev.u == ev.v or ev.u in graph._retired or ev.v in graph._retired:
                summary.skipped += 1
                continue
            ensure(ev.u)
            ensure(ev.v)
            graph.add_edge(ev.u, ev.v)
        elif ev.kind is ChangeKind.REMOVE_EDGE:
            if not graph.remove_edge(ev.u, ev.v):
                summary.skipped += 1
                continue
            affected[ev.u] = None
            affected[ev.v] = None
        summary.applied += 1

    out = [v for v in affected if v in graph]
    summary.affected = out
    return out


def edge_cut_set(graph: DynamicGraph, assignment=None) -> int:
    """Number of undirected edges whose endpoints lie in different partitions."""
    a = graph.assignment if assignment is None else assignment
    return sum(1 for u, v in graph.edges() if a[u] != a[v])


def cut_ratio(graph: DynamicGraph, assignment=None) -> float:
    if graph.num_edges == 0:
        return 0.0
    return edge_cut_set(graph, assignment) / graph.num_edges


def neighbour_partition_histogram(graph: DynamicGraph, v, assignment=None) -> dict[int, int]:
    a = graph.assignment if assignment is None else assignment
    return dict(Counter(a[w] for w in graph.neighbours(v)))
