"""Synthetic graphs and change streams.

* 3-D lattice meshes (6-neighbour connectivity).
* Power-law graphs with tunable clustering (Holme-Kim growth).
* Forest-fire growth bursts emitted as change events.
* A sliding-window call simulator that emits additions and expiries.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .graph import ChangeEvent, DynamicGraph


@dataclass(frozen=True)
class MeshSpec:
    nx: int
    ny: int | None = None
    nz: int | None = None

    @property
    def dims(self):
        return self.nx, self.ny or self.nx, self.nz or self.nx

    @property
    def num_vertices(self):
        a, b, c = self.dims
        return a * b * c

    @property
    def num_edges(self):
        a, b, c = self.dims
        return (a - 1) * b * c + a * (b - 1) * c + a * b * (c - 1)


def generate_mesh(spec: MeshSpec | int):
    """Yield the edges ``(u, v)``, ``u < v``, of a lattice mesh.

    Vertex ``(x, y, z)`` has id ``x + nx * (y + ny * z)``. An ``n``-cube has
    ``n**3`` vertices and ``3 * n**2 * (n - 1)`` edges.
    """
    if isinstance(spec, int):
        spec = MeshSpec(spec)
    a, b, c = spec.dims
    if min(a, b, c) < 1:
        raise ValueError("mesh sides must be >= 1")
    for z in range(c):
        for y in range(b):
            for x in range(a):
                v = x + a * (y + b * z)
                if x + 1 < a:
                    yield v, v + 1
                if y + 1 < b:
                    yield v, v + a
                if z + 1 < c:
                    yield v, v + a * b


def mesh_graph(spec: MeshSpec | int, k=1) -> DynamicGraph:
    if isinstance(spec, int):
        spec = MeshSpec(spec)
    return DynamicGraph.from_edges(generate_mesh(spec), k=k,
                                   vertices=range(spec.num_vertices))


@dataclass(frozen=True)
class PowerLawSpec:
    n: int
    m: int
    p: float = 0.1
    seed: int = 0


def default_attachment(n: int) -> int:
    """Edges per new vertex, ``round(log2(n))``; reproduces the plc row sizes."""
    return max(1, round(math.log2(n)))


def generate_powerlaw(spec: PowerLawSpec):
    """Holme-Kim growth: preferential attachment with triad closure.

    Starts from a complete graph on ``m + 1`` vertices. Each later vertex
    adds ``m`` edges: the first by preferential attachment, each following
    one closes a triangle with a neighbour of the previous target with
    probability ``p`` and otherwise attaches preferentially again.
    """
    n, m, p = spec.n, spec.m, spec.p
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    rng = random.Random(spec.seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    edges = []
    ends: list[int] = []  # every edge endpoint once: degree-proportional sampling

    def link(u, v):
        adj[u].add(v)
        adj[v].add(u)
        edges.append((min(u, v), max(u, v)))
        ends.extend((u, v))

    for u in range(m + 1):
        for v in range(u + 1, m + 1):
            link(u, v)
    for u in range(m + 1, n):
        targets = set()
        last = None
        while len(targets) < m:
            w = None
            if last is not None and rng.random() < p:
                choices = sorted(adj[last] - targets - {u})
                if choices:
                    w = rng.choice(choices)
            if w is None:
                w = ends[rng.randrange(len(ends))]
                if w in targets:
                    continue
            targets.add(w)
            last = w
        for w in sorted(targets):
            link(u, w)
    return edges


def powerlaw_graph(spec: PowerLawSpec, k=1) -> DynamicGraph:
    return DynamicGraph.from_edges(generate_powerlaw(spec), k=k, vertices=range(spec.n))


@dataclass(frozen=True)
class ForestFireSpec:
    grow: float
    pf: float = 0.35
    seed: int = 0


def generate_forest_fire_changes(graph: DynamicGraph, spec: ForestFireSpec, first_id=None):
    """Forest-fire growth burst as AddVertex/AddEdge events.

    Adds ``round(grow * |V|)`` vertices with fresh ids. Each new vertex picks
    a uniform random ambassador among the vertices present so far, then
    burns outward: every burned vertex ignites a geometric number (mean
    ``pf / (1 - pf)``) of its unburned neighbours. The new vertex links to
    every burned vertex.
    """
    if graph.num_vertices == 0:
        raise ValueError("forest fire needs a non-empty base graph")
    if not 0.0 <= spec.pf < 1.0:
        raise ValueError("pf must lie in [0, 1)")
    rng = random.Random(spec.seed)
    count = round(spec.grow * graph.num_vertices)
    adj = {v: set(nbrs) for v, nbrs in graph.adj.items()}
    present = sorted(adj)
    nxt = (max(present) + 1) if first_id is None else first_id
    events = []
    for _ in range(count):
        u = nxt
        nxt += 1
        ambassador = present[rng.randrange(len(present))]
        burned = {ambassador}
        frontier = [ambassador]
        while frontier:
            w = frontier.pop(0)
            x = 0
            while spec.pf > 0 and rng.random() < spec.pf:
                x += 1
            fresh = sorted(adj[w] - burned)
            if x and fresh:
                for y in rng.sample(fresh, min(x, len(fresh))):
                    burned.add(y)
                    frontier.append(y)
        events.append(ChangeEvent.add_vertex(u))
        adj[u] = set()
        for w in sorted(burned):
            events.append(ChangeEvent.add_edge(u, w))
            adj[u].add(w)
            adj[w].add(u)
        present.append(u)
    return events


def call_window_stream(n_users=500, steps=40, calls_per_step=200, window=7,
                       communities=10, locality=0.9, seed=0):
    """Simulate a call-detail stream over a sliding inactivity window.

    Returns one list of change events per step. Calls add edges (and their
    endpoints); an edge idle for more than ``window`` steps is removed, and
    a vertex left without edges is removed with it. Removed user ids are
    never reused.
    """
    rng = random.Random(seed)
    community = [rng.randrange(communities) for _ in range(n_users)]
    members = [[u for u in range(n_users) if community[u] == c] for c in range(communities)]
    ids = list(range(n_users))
    next_id = n_users
    last_seen: dict[tuple[int, int], int] = {}
    degree: dict[int, int] = {}
    live: set[int] = set()
    stream = []
    for step in range(steps):
        events = []
        for _ in range(calls_per_step):
            a = rng.randrange(n_users)
            group = members[community[a]]
            b = rng.choice(group) if rng.random() < locality else rng.randrange(n_users)
            if a == b:
                continue
            u, v = ids[a], ids[b]
            key = (min(u, v), max(u, v))
            for x in key:
                if x not in live:
                    live.add(x)
                    events.append(ChangeEvent.add_vertex(x))
            if key not in last_seen:
                events.append(ChangeEvent.add_edge(*key))
                degree[key[0]] = degree.get(key[0], 0) + 1
                degree[key[1]] = degree.get(key[1], 0) + 1
            last_seen[key] = step
        for key in sorted(k for k, s in last_seen.items() if step - s > window):
            del last_seen[key]
            events.append(ChangeEvent.remove_edge(*key))
            for x in key:
                degree[x] -= 1
                if degree[x] == 0:
                    del degree[x]
                    live.discard(x)
                    events.append(ChangeEvent.remove_vertex(x))
                    # a returning user gets a fresh id
                    slot = ids.index(x)
                    ids[slot] = next_id
                    next_id += 1
        stream.append(events)
    return stream
