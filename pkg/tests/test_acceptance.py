"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import random
import statistics
import sys
from functools import lru_cache
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from churn import churn_run  # noqa: E402
from conftest import random_graph  # noqa: E402
from graphshift.engine import Engine  # noqa: E402
from graphshift.experiment import (ExperimentManifest, manifest_from_mapping,  # noqa: E402
                                   recovery_iterations, run_experiment)
from graphshift.generators import MeshSpec, generate_mesh, mesh_graph  # noqa: E402
from graphshift.heuristic import HeuristicConfig  # noqa: E402
from graphshift.partitioners import initial_partition  # noqa: E402
from graphshift.workloads import CliqueProgram, InfluenceProgram, collect_cliques  # noqa: E402

SEEDS = range(10)
MESH = "mesh:10x10x100"
PLC = "plc:10000:13:0.1"
RESULTS: dict[int, tuple[bool, str]] = {}


def record(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = (ok, line)
    print(line)
    assert ok, line


def manifest(**kw):
    return manifest_from_mapping(kw, env={})


@lru_cache(maxsize=None)
def converged_run(graph, initial, s, seed):
    """(initial cut ratio, final cut ratio, iterations) of a run to convergence."""
    res = run_experiment(manifest(graph=graph, initial=initial, s=s, seed=seed))
    reps = res.reports
    return reps[0].cut_ratio, reps[-1].cut_ratio, len(reps), reps[-1].converged


def test_criterion_01_fem_cut_ratio_improvement():
    runs = [converged_run(MESH, "hsh", 0.5, seed) for seed in SEEDS]
    initial = statistics.mean(r[0] for r in runs)
    final = statistics.mean(r[1] for r in runs)
    record(1, final <= initial - 0.5,
           f"1e4 mesh HSH k=9 s=0.5: initial {initial:.4f} -> final {final:.4f} "
           f"(improvement {initial - final:.4f}, need >= 0.5)")


def test_criterion_02_initial_strategy_ordering():
    hsh = [converged_run(MESH, "hsh", 0.5, seed) for seed in SEEDS]
    dgr = [converged_run(MESH, "dgr", 0.5, seed) for seed in SEEDS]
    hsh_final = statistics.mean(r[1] for r in hsh)
    dgr_initial = statistics.mean(r[0] for r in dgr)
    dgr_final = statistics.mean(r[1] for r in dgr)
    per_seed = all(d[1] <= h[1] + 0.05 for d, h in zip(dgr, hsh))
    gain = dgr_initial - dgr_final
    record(2, per_seed and dgr_final <= hsh_final + 0.05 and gain < 0.1,
           f"DGR final {dgr_final:.4f} vs HSH final {hsh_final:.4f} (+0.05), "
           f"DGR improvement {gain:.4f} (< 0.1)")


def test_criterion_03_s_insensitivity():
    parts, ok = [], True
    for graph in (MESH, PLC):
        stats = {}
        for s in (0.25, 0.5, 0.75):
            finals = [converged_run(graph, "hsh", s, seed)[1] for seed in SEEDS]
            stats[s] = (statistics.mean(finals), statistics.stdev(finals))
        for a, b in ((0.25, 0.5), (0.25, 0.75), (0.5, 0.75)):
            (ma, sa), (mb, sb) = stats[a], stats[b]
            ok &= abs(ma - mb) <= sa + sb
        parts.append(graph.split(":")[0] + " " + ", ".join(
            f"s={s}: {m:.4f}±{sd:.4f}" for s, (m, sd) in stats.items()))
    record(3, ok, "mean±sd final cut ratio; " + "; ".join(parts))


def test_criterion_04_convergence_detection():
    iters = []
    for graph in (MESH, "mesh:20"):
        for seed in SEEDS:
            _, _, n, converged = converged_run(graph, "hsh", 0.5, seed)
            iters.append(n if converged else None)
    all_converged = all(n is not None and n <= 500 for n in iters)
    g = mesh_graph(MeshSpec(10, 10, 100), k=9)
    g.assignment.update(initial_partition(g, "hsh"))
    eng = Engine(g, HeuristicConfig(s=0.0))
    zero = eng.run(max_iterations=40)
    still = all(r.proposed == 0 and r.committed == 0 for r in zero)
    record(4, all_converged and still and len(zero) == 30,
           f"s=0.5 converged in {min(iters or [0])}-{max(n or 0 for n in iters)} iterations "
           f"(limit 500) on 20 runs; s=0: no migrations, idle after {len(zero)} iterations")


def _capacity_trial(rng):
    k = rng.randint(2, 5)
    caps = [rng.randint(1, 20) for _ in range(k)]
    n = rng.randint(1, sum(caps))
    slots = [p for p in range(k) for _ in range(caps[p])]
    rng.shuffle(slots)
    g = random_graph(n, rng.uniform(0.05, 0.6), rng.randrange(2**32), k=k)
    for v, p in zip(sorted(g.vertices()), slots):
        g.assignment[v] = p
    eng = Engine(g, HeuristicConfig(s=rng.uniform(0.2, 1.0), seed=rng.randrange(2**32)),
                 capacities=caps)
    quotas = []
    for _ in range(5):
        quotas.append([max(0, r) // (k - 1) for r in eng.bulletin.remaining])
        seen = len(eng.plan.history)
        eng.run_superstep()
        sizes = g.partition_sizes()
        if any(sizes[i] > caps[i] for i in range(k)):
            return False, "size"
        if len(quotas) >= 2:
            pair = {}
            for e in eng.plan.history[seen:]:
                pair[(e.source, e.destination)] = pair.get((e.source, e.destination), 0) + 1
            # commits at this barrier were admitted one superstep earlier
            if any(c > quotas[-2][j] for (_, j), c in pair.items()):
                return False, "quota"
    return True, len(eng.plan.history)


def test_criterion_05_capacity_safety():
    rng = random.Random(2024)
    failures, moved = [], 0
    for trial in range(10_000):
        ok, info = _capacity_trial(rng)
        if not ok:
            failures.append((trial, info))
        else:
            moved += info
    record(5, not failures,
           f"10^4 randomized trials (k<=5, capacities<=20): {len(failures)} violations, "
           f"{moved} committed migrations checked")


def test_criterion_06_message_conservation():
    eng, queued = churn_run(n=500, iterations=200, seed=0, deletions=False)
    reps, t = eng.reports, eng.totals
    stepwise = all(b.messages_delivered == a.messages_sent for a, b in zip(reps, reps[1:]))
    # migrations keep happening: every 20-superstep window commits some
    windows = [sum(r.committed for r in reps[i:i + 20]) for i in range(0, 200, 20)]
    active = sum(1 for r in reps if r.committed > 0)
    ok_plain = stepwise and t.dead_letters == 0 and t.lost == 0 and t.sent == t.delivered + queued
    eng2, queued2 = churn_run(n=500, iterations=200, seed=0, deletions=True)
    t2 = eng2.totals
    ok_del = t2.lost == 0 and t2.sent == t2.delivered + t2.dead_letters + queued2
    record(6, ok_plain and ok_del and min(windows) > 0,
           f"no deletions: sent {t.sent} = delivered {t.delivered} + in flight {queued}, "
           f"dead {t.dead_letters}, migrations in {active}/200 supersteps "
           f"(min per 20-superstep window {min(windows)}); with deletions: "
           f"sent {t2.sent} = delivered {t2.delivered} + dead {t2.dead_letters} + "
           f"in flight {queued2}")


BURSTS = {50: 0.01, 100: 0.02, 150: 0.05, 200: 0.10}


def _burst_manifest(seed, adaptive):
    inj = ", ".join(f"{it}@fire:{g}" for it, g in BURSTS.items())
    return manifest(graph=MESH, seed=seed, injections=inj, adaptive=adaptive,
                    until_converged=False, max_iterations=250)


def test_criterion_07_dynamic_recovery():
    slow, non_monotone = [], []
    worst = 0
    for seed in SEEDS:
        rows = run_experiment(_burst_manifest(seed, True)).rows()
        for it in BURSTS:
            dt = recovery_iterations(rows, it, tolerance=0.10, horizon=30)
            if dt is None:
                slow.append((seed, it))
            else:
                worst = max(worst, dt)
        base = run_experiment(_burst_manifest(seed, False)).rows()
        ratio = {int(r["iteration"]): float(r["cut_ratio"]) for r in base}
        checkpoints = [ratio[it - 1] for it in BURSTS] + [ratio[250]]
        if any(b < a for a, b in zip(checkpoints, checkpoints[1:])):
            non_monotone.append((seed, [round(c, 4) for c in checkpoints]))
    record(7, not slow and not non_monotone,
           f"adaptive: {40 - len(slow)}/40 bursts recovered within 10% "
           f"(slowest {worst} iterations); hash baseline monotone in "
           f"{10 - len(non_monotone)}/10 seeds; decreasing: {non_monotone[:3]}")


def test_criterion_08_workload_oracles():
    clique_ok = influence_ok = invariant = True
    for i in range(20):
        outputs = []
        for adaptive in (False, True):
            g = random_graph(30, 0.3, 100 + i, k=3)
            g.assignment.update(initial_partition(g, "hsh"))
            eng = Engine(g, HeuristicConfig(s=0.5, seed=i), CliqueProgram(), adaptive=adaptive)
            eng.run(max_iterations=2, until_converged=False)
            outputs.append(collect_cliques(eng.states))
        nxg = nx.Graph(list(g.edges()))
        nxg.add_nodes_from(g.vertices())
        expected = {frozenset(c) for c in nx.find_cliques(nxg) if len(c) >= 3}
        clique_ok &= set(outputs[0]) == expected and len(outputs[0]) == len(expected)
        invariant &= sorted(map(sorted, outputs[0])) == sorted(map(sorted, outputs[1]))

    worst = 0.0
    for i in range(20):
        scores = []
        for adaptive in (False, True):
            g = random_graph(20, 0.25, 200 + i, k=3)
            g.assignment.update(initial_partition(g, "hsh"))
            eng = Engine(g, HeuristicConfig(s=0.5, seed=i), InfluenceProgram(0.5),
                         adaptive=adaptive)
            eng.run(max_iterations=150, until_converged=False)
            scores.append({v: st.score for v, st in eng.states.items()})
        ids = sorted(g.vertices())
        m = np.zeros((20, 20))
        for v in ids:
            for w in g.adj[v]:
                m[w, v] = 1.0 / len(g.adj[v])
        exact = np.linalg.solve(np.eye(20) - 0.5 * m, m @ np.ones(20))
        err = max(abs(scores[0][v] - exact[v]) for v in ids)
        worst = max(worst, err)
        influence_ok &= err <= 1e-9
        invariant &= scores[0] == scores[1]
    record(8, clique_ok and influence_ok and invariant,
           f"cliques = Bron-Kerbosch on 20 G(30,0.3): {clique_ok}; influence max error "
           f"{worst:.2e} (<= 1e-9); identical with adaptation on/off: {invariant}")


def test_criterion_09_generator_exactness():
    counts = {n: sum(1 for _ in generate_mesh(n)) for n in (2, 10, 40, 100)}
    ok = all(c == 3 * n * n * (n - 1) for n, c in counts.items())
    ok &= counts[40] == 187200 and counts[100] == 2970000
    record(9, ok, "mesh edge counts " + ", ".join(f"n={n}: {c}" for n, c in counts.items()))


def test_criterion_10_determinism(tmp_path):
    m = manifest(graph="mesh:10x10x20", partitions=5, seed=3, workload="influence",
                 workers=2, injections="20@fire:0.05, 40@fire:0.02", max_iterations=120)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_experiment(m, out=a)
    run_experiment(ExperimentManifest(**m.__dict__), out=b)
    same = a.read_bytes() == b.read_bytes()
    record(10, same, f"rerun CSV byte-identical: {same} ({len(a.read_bytes())} bytes)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
