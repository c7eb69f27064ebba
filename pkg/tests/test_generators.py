from collections import Counter

import pytest

from graphshift.generators import (ForestFireSpec, MeshSpec, PowerLawSpec, call_window_stream,
                                   default_attachment, generate_forest_fire_changes,
                                   generate_mesh, generate_powerlaw, mesh_graph)
from graphshift.graph import ChangeKind, DynamicGraph, FlushSummary, apply_changes


@pytest.mark.parametrize("n,edges", [(1, 0), (2, 12), (3, 54), (10, 2700)])
def test_mesh_counts(n, edges):
    g = mesh_graph(n)
    g.check_invariants()
    assert g.num_vertices == n ** 3
    assert g.num_edges == edges == 3 * n * n * (n - 1)


def test_mesh_degrees_and_box():
    g = mesh_graph(MeshSpec(10, 10, 100))
    assert (g.num_vertices, g.num_edges) == (10000, 27900)   # the 1e4 dataset size
    degrees = Counter(g.degree(v) for v in g.vertices())
    assert degrees[3] == 8 and max(degrees) == 6
    assert MeshSpec(10, 10, 100).num_edges == 27900


def test_mesh_ids_are_lattice_neighbours():
    for u, v in generate_mesh(MeshSpec(3, 4, 5)):
        d = v - u
        assert d in (1, 3, 12)


def test_powerlaw_seed_graph_is_complete():
    edges = generate_powerlaw(PowerLawSpec(5, 4))
    assert sorted(edges) == [(u, v) for u in range(5) for v in range(u + 1, 5)]
    with pytest.raises(ValueError):
        generate_powerlaw(PowerLawSpec(3, 3))


def test_powerlaw_size_and_determinism():
    assert default_attachment(1000) == 10 and default_attachment(10000) == 13
    edges = generate_powerlaw(PowerLawSpec(1000, 10, 0.1, seed=1))
    # close to the 9879 edges of the plc1000 dataset
    assert abs(len(edges) - 9879) <= 0.1 * 9879
    assert len(set(edges)) == len(edges)
    assert edges == generate_powerlaw(PowerLawSpec(1000, 10, 0.1, seed=1))
    assert edges != generate_powerlaw(PowerLawSpec(1000, 10, 0.1, seed=2))


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_powerlaw_heavy_tail(seed):
    edges = generate_powerlaw(PowerLawSpec(10000, 13, 0.1, seed))
    deg = Counter(x for e in edges for x in e)
    mean = 2 * len(edges) / 10000
    assert max(deg.values()) >= 5 * mean


def test_powerlaw_triads_raise_clustering():
    import networkx as nx
    lo = nx.Graph(generate_powerlaw(PowerLawSpec(2000, 4, 0.0, 3)))
    hi = nx.Graph(generate_powerlaw(PowerLawSpec(2000, 4, 0.9, 3)))
    assert nx.average_clustering(hi) > 2 * nx.average_clustering(lo)


def test_forest_fire_trivial_cases():
    base = mesh_graph(3)
    assert generate_forest_fire_changes(base, ForestFireSpec(0.0)) == []
    events = generate_forest_fire_changes(base, ForestFireSpec(0.2, pf=0.0, seed=1))
    adds = [e for e in events if e.kind is ChangeKind.ADD_EDGE]
    assert len(adds) == round(0.2 * 27)          # one link per new vertex
    with pytest.raises(ValueError):
        generate_forest_fire_changes(DynamicGraph(), ForestFireSpec(0.1))


def test_forest_fire_stream_audit_and_replay():
    base = mesh_graph(MeshSpec(10, 10, 100), k=9)
    events = generate_forest_fire_changes(base, ForestFireSpec(0.05, seed=4))
    new = [e.u for e in events if e.kind is ChangeKind.ADD_VERTEX]
    assert len(new) == 500 and min(new) == 10000
    fresh = set(new)
    edges = [e for e in events if e.kind is ChangeKind.ADD_EDGE]
    assert all(e.u in fresh or e.v in fresh for e in edges)
    assert len(edges) > 500                       # burning spreads past the ambassador
    summary = FlushSummary()
    apply_changes(base, events, summary=summary)
    base.check_invariants()
    assert summary.skipped == 0 and base.num_vertices == 10500
    assert all(base.degree(v) >= 1 for v in fresh)
    again = generate_forest_fire_changes(mesh_graph(MeshSpec(10, 10, 100)),
                                         ForestFireSpec(0.05, seed=4))
    assert again == events


def test_call_window_stream_replays_cleanly():
    stream = call_window_stream(n_users=200, steps=30, calls_per_step=80, window=4, seed=2)
    g = DynamicGraph(4)
    removed = set()
    for step in stream:
        summary = FlushSummary()
        apply_changes(g, step, summary=summary)
        assert summary.skipped == 0
        g.check_invariants()
        assert not removed & set(g.vertices())
        removed.update(summary.removed_vertices)
    kinds = Counter(e.kind for step in stream for e in step)
    assert kinds[ChangeKind.REMOVE_EDGE] > 0 and kinds[ChangeKind.REMOVE_VERTEX] > 0
    assert stream == call_window_stream(n_users=200, steps=30, calls_per_step=80, window=4,
                                        seed=2)
