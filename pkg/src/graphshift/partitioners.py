"""Initial partitioning strategies: HSH, RND, DGR and MNN."""
from __future__ import annotations

import enum
import math
import random

_MASK = (1 << 64) - 1


class PartitionerError(RuntimeError):
    pass


class PartitionerKind(str, enum.Enum):
    HSH = "hsh"
    RND = "rnd"
    DGR = "dgr"
    MNN = "mnn"


def splitmix64(x: int) -> int:
    """SplitMix64 output function applied to ``x`` as the generator state."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def hash_partition(v: int, k: int, hash_fn=splitmix64) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    return hash_fn(int(v) & _MASK) % k


def random_partition(vertices, k: int, seed: int = 0) -> dict[int, int]:
    """Balanced pseudorandom assignment: round-robin over a seeded shuffle."""
    order = list(vertices)
    random.Random(seed).shuffle(order)
    return {v: i % k for i, v in enumerate(order)}


def _pick(scores, sizes, open_parts, best):
    # best(a, b) -> True if score a beats b; ties fall to least-loaded, then lowest index
    choice = None
    for i in open_parts:
        if choice is None:
            choice = i
            continue
        if best(scores[i], scores[choice]):
            choice = i
        elif scores[i] == scores[choice] and sizes[i] < sizes[choice]:
            choice = i
    return choice


def _stream_partition(stream, k, capacity, better):
    if capacity <= 0:
        raise PartitionerError("capacity must be positive")
    assignment: dict[int, int] = {}
    sizes = [0] * k
    for v, nbrs in stream:
        counts = [0] * k
        for w in nbrs:
            p = assignment.get(w)
            if p is not None:
                counts[p] += 1
        open_parts = [i for i in range(k) if sizes[i] < capacity]
        if not open_parts:
            raise PartitionerError(
                f"all {k} partitions are full (capacity {capacity}) at vertex {v}")
        choice = better(counts, sizes, open_parts, capacity)
        assignment[v] = choice
        sizes[choice] += 1
    return assignment


def _dgr_choice(counts, sizes, open_parts, capacity):
    scores = [counts[i] * (1.0 - sizes[i] / capacity) for i in range(len(counts))]
    return _pick(scores, sizes, open_parts, lambda a, b: a > b)


def _mnn_choice(counts, sizes, open_parts, capacity):
    return _pick(counts, sizes, open_parts, lambda a, b: a < b)


def deterministic_greedy_partition(stream, k: int, capacity: int) -> dict[int, int]:
    """Linear deterministic greedy over a stream of ``(vertex, neighbours)``.

    Each vertex goes to the open partition maximising
    ``|P_i & N(v)| * (1 - |P_i| / capacity)`` where only already-placed
    neighbours count.
    """
    return _stream_partition(stream, k, capacity, _dgr_choice)


def min_neighbours_partition(stream, k: int, capacity: int) -> dict[int, int]:
    """Place each vertex in the open partition holding the fewest of its seen neighbours."""
    return _stream_partition(stream, k, capacity, _mnn_choice)


def vertex_stream(graph, order="natural", seed=0):
    ids = sorted(graph.vertices())
    if order == "random":
        random.Random(seed).shuffle(ids)
    elif order != "natural":
        raise ValueError(f"unknown stream order {order!r}")
    for v in ids:
        yield v, graph.adj[v]


def initial_partition(graph, kind, k=None, seed=0, order="natural", hash_fn=splitmix64):
    """Compute an initial assignment for every vertex of ``graph``.

    Stream strategies use capacity ``ceil(|V| / k)``.
    """
    kind = PartitionerKind(kind)
    k = graph.k if k is None else k
    if kind is PartitionerKind.HSH:
        return {v: hash_partition(v, k, hash_fn) for v in graph.vertices()}
    if kind is PartitionerKind.RND:
        return random_partition(sorted(graph.vertices()), k, seed)
    capacity = max(1, math.ceil(graph.num_vertices / k))
    stream = vertex_stream(graph, order, seed)
    if kind is PartitionerKind.DGR:
        return deterministic_greedy_partition(stream, k, capacity)
    return min_neighbours_partition(stream, k, capacity)


def apply_partition(graph, kind, seed=0, order="natural"):
    graph.assignment.update(initial_partition(graph, kind, seed=seed, order=order))
    return graph
