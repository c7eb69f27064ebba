"""Vertex programs: influence ranking, maximal cliques and synthetic load."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .engine import VertexProgram


# -- influence --------------------------------------------------------------

@dataclass
class InfluenceState:
    score: float = 0.0
    degree: int = 0


def influence_step(v, incoming, p, degree):
    """One influence update for vertex ``v``.

    ``incoming`` holds each neighbour's contribution
    ``(1 + p * score) / degree``; the new score is their sum. Returns
    ``(score, contribution)`` where ``contribution`` is what ``v`` sends to
    each neighbour (None when ``v`` has no neighbours).
    """
    score = math.fsum(incoming)
    if degree == 0:
        return score, None
    return score, (1.0 + p * score) / degree


class InfluenceProgram(VertexProgram):
    """TunkRank-style influence on an undirected graph."""

    def __init__(self, damping=0.5):
        self.damping = damping

    def init_state(self, v, graph):
        return InfluenceState(0.0, graph.degree(v))

    def compute(self, vertex, state, messages):
        degree = len(vertex.neighbours)
        score, share = influence_step(vertex.id, [m.payload for m in messages],
                                      self.damping, degree)
        out = [] if share is None else [(w, share) for w in vertex.neighbours]
        return InfluenceState(score, degree), out, False

    @staticmethod
    def result(state):
        return state.score


# -- maximal cliques --------------------------------------------------------

@dataclass
class CliqueState:
    neighbours: tuple = ()
    cliques: list = field(default_factory=list)
    cycle: int = 0


def _local_maximal_cliques(nodes, adj):
    """Bron-Kerbosch with pivoting over a small local graph."""
    found = []

    def expand(r, p, x):
        if not p and not x:
            found.append(r)
            return
        pivot = max(p | x, key=lambda u: len(adj[u] & p))
        for u in sorted(p - adj[pivot]):
            expand(r | {u}, p & adj[u], x & adj[u])
            p = p - {u}
            x = x | {u}

    expand(frozenset(), set(nodes), set())
    return found


def clique_round(v, phase, neighbours, incoming, min_size=3):
    """One step of the two-superstep clique protocol.

    Phase 1 returns the messages: ``v`` sends the list of its higher-id
    neighbours to each of them. Phase 2 consumes the lists received from
    lower-id neighbours and returns the maximal cliques whose highest-id
    member is ``v``, so each clique is reported by exactly one vertex.
    """
    higher = tuple(w for w in neighbours if w > v)
    if phase == 1:
        return [(w, higher) for w in higher]
    lower = {u: set(lst) for u, lst in incoming}
    local = set(lower)
    adj = {u: (lower[u] & local) for u in local}
    for u in local:
        for w in adj[u]:
            adj[w].add(u)
    cliques = []
    for core in _local_maximal_cliques(local, adj):
        # maximal in the whole graph unless a higher neighbour of v touches all of it
        if any(all(w in lower[u] for u in core) for w in higher):
            continue
        clique = frozenset(core | {v})
        if len(clique) >= min_size:
            cliques.append(clique)
    return cliques


class CliqueProgram(VertexProgram):
    """Maximal clique listing in two-superstep cycles.

    Topology must stay frozen across a cycle, so the engine should flush
    changes every second superstep.
    """

    def __init__(self, min_size=3):
        self.min_size = min_size

    def init_state(self, v, graph):
        return CliqueState()

    def compute(self, vertex, state, messages):
        phase = 1 if vertex.iteration % 2 == 1 else 2
        if phase == 1:
            out = clique_round(vertex.id, 1, vertex.neighbours, ())
            return CliqueState(vertex.neighbours, state.cliques, state.cycle), out, False
        found = clique_round(vertex.id, 2, vertex.neighbours,
                             [(m.src, m.payload) for m in messages], self.min_size)
        return CliqueState(vertex.neighbours, sorted(found, key=sorted), state.cycle + 1), [], False

    @staticmethod
    def result(state):
        return state.cliques


def collect_cliques(states):
    """Union of the cliques reported by every vertex state."""
    out = []
    for st in states.values():
        out.extend(st.cliques)
    return out


# -- synthetic load ---------------------------------------------------------

def burn(cost: int) -> float:
    x = 0.5
    for _ in range(cost):
        x = x * 3.9 * (1.0 - x)
    return x


def synthetic_load_step(v, neighbours, cost, payload_size=64):
    """Spin ``cost`` logistic-map steps, then message every neighbour."""
    if cost < 0:
        raise ValueError("cost must be >= 0")
    burn(cost)
    payload = bytes(payload_size)
    return [(w, payload) for w in neighbours]


class SyntheticLoadProgram(VertexProgram):
    def __init__(self, cost=0, payload_size=64):
        if cost < 0:
            raise ValueError("cost must be >= 0")
        self.cost = cost
        self.payload_size = payload_size

    def init_state(self, v, graph):
        return 0

    def compute(self, vertex, state, messages):
        out = synthetic_load_step(vertex.id, vertex.neighbours, self.cost, self.payload_size)
        return len(messages), out, False

    @staticmethod
    def result(state):
        return state


def make_program(name, damping=0.5, cost=0):
    if name in (None, "none"):
        return None
    if name == "influence":
        return InfluenceProgram(damping)
    if name == "cliques":
        return CliqueProgram()
    if name == "synthetic":
        return SyntheticLoadProgram(cost)
    raise ValueError(f"unknown workload {name!r}")
