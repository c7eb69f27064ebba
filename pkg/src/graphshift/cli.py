"""Command line: ``graphshift {generate,partition,run,compare}``."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import experiment as exp
from .formats import read_edge_list, write_change_stream, write_edge_list
from .generators import (ForestFireSpec, MeshSpec, PowerLawSpec, default_attachment,
                         generate_forest_fire_changes, generate_mesh, generate_powerlaw)
from .graph import DynamicGraph, cut_ratio
from .partitioners import initial_partition


def _seed(args_seed, default=0):
    env = os.environ.get("GRAPHSHIFT_SEED")
    if env:
        return int(env)
    return default if args_seed is None else args_seed


def cmd_generate(args):
    if args.kind == "mesh":
        dims = (args.n, args.ny or args.n, args.nz or args.n)
        spec = MeshSpec(*dims)
        write_edge_list(args.out, generate_mesh(spec),
                        header=f"mesh {dims[0]}x{dims[1]}x{dims[2]}: "
                               f"{spec.num_vertices} vertices, {spec.num_edges} edges")
    elif args.kind == "plc":
        m = args.m or default_attachment(args.n)
        spec = PowerLawSpec(args.n, m, args.p, _seed(args.seed))
        edges = generate_powerlaw(spec)
        write_edge_list(args.out, edges,
                        header=f"powerlaw n={args.n} m={m} p={args.p} seed={spec.seed}")
    else:
        vertices, edges = read_edge_list(args.base)
        graph = DynamicGraph.from_edges(edges, vertices=vertices)
        events = generate_forest_fire_changes(
            graph, ForestFireSpec(args.grow, args.pf, _seed(args.seed)))
        write_change_stream(args.out, events, when=args.at)
    return 0


def cmd_partition(args):
    graph = exp.parse_graph_source(args.graph, k=args.partitions)
    assignment = initial_partition(graph, args.initial, seed=_seed(args.seed))
    graph.assignment.update(assignment)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for v in sorted(assignment):
                fh.write(f"{v} {assignment[v]}\n")
    print(json.dumps({"vertices": graph.num_vertices, "edges": graph.num_edges,
                      "cut_ratio": round(cut_ratio(graph), 6),
                      "sizes": graph.partition_sizes()}))
    return 0


_RUN_FLAGS = ("graph", "partitions", "initial", "s", "alpha", "window", "seed", "workload",
              "damping", "cost", "workers", "max_iterations", "flush_every", "results_every")


def cmd_run(args):
    values = {}
    if args.manifest:
        with open(args.manifest, encoding="utf-8") as fh:
            base = exp.parse_manifest(fh.read(), env={})
        values.update({k: v for k, v in vars(base).items()})
    for key in _RUN_FLAGS:
        value = getattr(args, key)
        if value is not None:
            values[key] = value
    if args.static:
        values["adaptive"] = False
    if args.no_stop:
        values["until_converged"] = False
    if args.timing:
        values["timing"] = True
    if args.inject:
        values["injections"] = exp.parse_injections(",".join(args.inject))
    manifest = exp.manifest_from_mapping(values)
    result = exp.run_experiment(manifest, out=args.out, results_out=args.results_out)
    manifest_path = args.write_manifest or (os.path.splitext(args.out)[0] + ".manifest"
                                            if args.out else None)
    if manifest_path:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            fh.write(manifest.to_text())
    last = result.reports[-1] if result.reports else None
    print(json.dumps({
        "iterations": len(result.reports),
        "initial_cut_ratio": round(result.reports[0].cut_ratio, 6) if last else None,
        "final_cut_ratio": round(last.cut_ratio, 6) if last else None,
        "converged": bool(last and last.converged),
    }))
    return 0


def _finite(obj):
    # timing fields are NaN when the series has no wall-time columns; JSON has no NaN
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def cmd_compare(args):
    phases = exp.compare_runs(exp.read_series(args.baseline), exp.read_series(args.adaptive),
                              tail=args.tail)
    print(json.dumps(_finite(phases), indent=2, allow_nan=False))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="graphshift", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic graph or change stream")
    gsub = gen.add_subparsers(dest="kind", required=True)
    mesh = gsub.add_parser("mesh")
    mesh.add_argument("--n", type=int, required=True, help="side length (x side if --ny/--nz)")
    mesh.add_argument("--ny", type=int)
    mesh.add_argument("--nz", type=int)
    mesh.add_argument("-o", "--out", required=True)
    plc = gsub.add_parser("plc")
    plc.add_argument("--n", type=int, required=True)
    plc.add_argument("--m", type=int, help="edges per new vertex (default round(log2 n))")
    plc.add_argument("--p", type=float, default=0.1)
    plc.add_argument("--seed", type=int)
    plc.add_argument("-o", "--out", required=True)
    fire = gsub.add_parser("fire")
    fire.add_argument("--grow", type=float, required=True)
    fire.add_argument("--pf", type=float, default=0.35)
    fire.add_argument("--base", required=True)
    fire.add_argument("--at", type=int, help="prefix events with @<iteration>")
    fire.add_argument("--seed", type=int)
    fire.add_argument("-o", "--out", required=True)

    part = sub.add_parser("partition", help="apply an initial partitioner and report its cut")
    part.add_argument("--graph", required=True, help="mesh:N | mesh:AxBxC | plc:N[:m[:p]] | file:path")
    part.add_argument("--partitions", type=int, default=9)
    part.add_argument("--initial", choices=["hsh", "rnd", "dgr", "mnn"], default="hsh")
    part.add_argument("--seed", type=int)
    part.add_argument("-o", "--out")

    run = sub.add_parser("run", help="run the engine and emit a per-superstep CSV")
    run.add_argument("--manifest")
    run.add_argument("--graph")
    run.add_argument("--partitions", type=int)
    run.add_argument("--initial", choices=["hsh", "rnd", "dgr", "mnn"])
    run.add_argument("--s", type=float)
    run.add_argument("--alpha", type=float)
    run.add_argument("--window", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--workload", choices=list(exp.WORKLOADS))
    run.add_argument("--damping", type=float)
    run.add_argument("--cost", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--max-iterations", type=int)
    run.add_argument("--flush-every", type=int)
    run.add_argument("--results-every", type=int)
    run.add_argument("--results-out")
    run.add_argument("--inject", action="append", help="<iteration>@fire:<grow>[:<pf>] or <iteration>@file:<path>")
    run.add_argument("--static", action="store_true", help="disable adaptive migration")
    run.add_argument("--no-stop", action="store_true", help="run all iterations")
    run.add_argument("--timing", action="store_true", help="add wall-time columns")
    run.add_argument("--write-manifest")
    run.add_argument("--out")

    cmp_ = sub.add_parser("compare", help="compare a baseline and an adaptive series")
    cmp_.add_argument("baseline")
    cmp_.add_argument("adaptive")
    cmp_.add_argument("--tail", type=float, default=0.5)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"generate": cmd_generate, "partition": cmd_partition,
               "run": cmd_run, "compare": cmd_compare}[args.command]
    try:
        return handler(args)
    except exp.ManifestError as exc:
        print(f"graphshift: manifest error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"graphshift: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
