"""Experiment manifests, per-superstep CSV series and run comparison.

Series CSV schema (version 1): a ``# schema=graphshift-series/1`` line,
then a header row with :data:`CSV_COLUMNS` (plus :data:`TIMING_COLUMNS`
when timing is enabled), then one row per superstep. ``cut_ratio`` is
normalised by the edge count at that superstep, so it stays comparable
while the graph grows or shrinks.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import os
from dataclasses import dataclass, field

import numpy as np

from .engine import Engine
from .formats import read_change_stream, read_edge_list, schedule
from .generators import (ForestFireSpec, MeshSpec, PowerLawSpec, generate_forest_fire_changes,
                         mesh_graph, powerlaw_graph)
from .graph import DynamicGraph
from .heuristic import HeuristicConfig
from .partitioners import PartitionerKind, apply_partition
from .workloads import make_program

SCHEMA = "graphshift-series/1"
CSV_COLUMNS = [
    "iteration", "vertices", "edges", "cut_edges", "cut_ratio", "proposed", "announced",
    "committed", "deferred", "dropped", "balance", "capacity", "messages_sent",
    "messages_delivered", "messages_remote", "envelopes", "dead_letters", "lost",
    "changes_applied", "changes_skipped", "converged", "sizes",
]
TIMING_COLUMNS = ["elapsed", "compute_time"]
WORKLOADS = ("none", "influence", "cliques", "synthetic")


class ManifestError(ValueError):
    """Invalid experiment manifest; the CLI maps it to exit code 2."""


@dataclass(frozen=True)
class Injection:
    iteration: int
    source: str


@dataclass
class ExperimentManifest:
    graph: str = "mesh:10x10x100"
    partitions: int = 9
    initial: str = "hsh"
    s: float = 0.5
    alpha: float = 1.2
    window: int = 30
    seed: int = 0
    adaptive: bool = True
    workload: str = "none"
    damping: float = 0.5
    cost: int = 0
    workers: int = 1
    max_iterations: int = 500
    flush_every: int = 1
    until_converged: bool = True
    timing: bool = False
    results_every: int = 0
    injections: tuple = ()

    def validate(self):
        try:
            PartitionerKind(self.initial)
        except ValueError:
            raise ManifestError(f"initial must be one of hsh|rnd|dgr|mnn, got {self.initial!r}") from None
        if self.partitions < 1:
            raise ManifestError("partitions must be >= 1")
        if not 0.0 <= self.s <= 1.0:
            raise ManifestError("s must lie in [0, 1]")
        if self.alpha < 1.0:
            raise ManifestError("alpha must be >= 1")
        if self.window < 1 or self.max_iterations < 0 or self.flush_every < 1 or self.workers < 1:
            raise ManifestError("window, flush_every and workers must be >= 1")
        if self.workload not in WORKLOADS:
            raise ManifestError(f"workload must be one of {'|'.join(WORKLOADS)}")
        if self.cost < 0:
            raise ManifestError("cost must be >= 0")
        for inj in self.injections:
            if inj.iteration < 1:
                raise ManifestError("injection iterations start at 1")
            kind = inj.source.split(":", 1)[0]
            if kind not in ("fire", "file"):
                raise ManifestError(f"unknown injection source {inj.source!r}")
        parse_graph_source(self.graph, check_only=True)
        return self

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "injections":
                value = ", ".join(f"{i.iteration}@{i.source}" for i in value)
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def _coerce(name, raw, kind):
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        return kind(raw.strip())
    except ValueError:
        raise ManifestError(f"bad value for {name}: {raw!r}") from None


def parse_injections(text: str) -> tuple:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        when, sep, source = part.partition("@")
        if not sep or not when.strip().isdigit():
            raise ManifestError(f"injection must look like '<iteration>@<source>', got {part!r}")
        out.append(Injection(int(when), source.strip()))
    return tuple(sorted(out, key=lambda i: i.iteration))


def manifest_from_mapping(values: dict, env=None) -> ExperimentManifest:
    types = {f.name: f.type for f in dataclasses.fields(ExperimentManifest)}
    kwargs = {}
    for key, raw in values.items():
        key = key.strip().replace("-", "_")
        if key not in types:
            raise ManifestError(f"unknown manifest key {key!r}")
        if key == "injections":
            kwargs[key] = parse_injections(raw) if isinstance(raw, str) else tuple(raw)
            continue
        kind = {"int": int, "float": float, "bool": bool, "str": str}[types[key]]
        kwargs[key] = raw if not isinstance(raw, str) else _coerce(key, raw, kind)
    env = os.environ if env is None else env
    if env.get("GRAPHSHIFT_SEED"):
        kwargs["seed"] = _coerce("GRAPHSHIFT_SEED", env["GRAPHSHIFT_SEED"], int)
    return ExperimentManifest(**kwargs).validate()


def parse_manifest(text: str, env=None) -> ExperimentManifest:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ManifestError(f"line {lineno}: expected key = value")
        values[key.strip()] = value.strip()
    return manifest_from_mapping(values, env)


def load_manifest(path, env=None) -> ExperimentManifest:
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh.read(), env)


def parse_graph_source(source: str, check_only=False, k=1):
    """Build a graph from ``mesh:N``, ``mesh:AxBxC``, ``plc:N[:m[:p[:seed]]]`` or ``file:path``."""
    kind, _, arg = source.partition(":")
    try:
        if kind == "mesh":
            dims = [int(x) for x in arg.lower().split("x")]
            if len(dims) not in (1, 3) or min(dims) < 1:
                raise ValueError
            spec = MeshSpec(*dims)
            return None if check_only else mesh_graph(spec, k)
        if kind == "plc":
            parts = arg.split(":")
            n = int(parts[0])
            from .generators import default_attachment
            m = int(parts[1]) if len(parts) > 1 and parts[1] else default_attachment(n)
            p = float(parts[2]) if len(parts) > 2 else 0.1
            gseed = int(parts[3]) if len(parts) > 3 else 0
            spec = PowerLawSpec(n, m, p, gseed)
            if not 1 <= m < n:
                raise ValueError
            return None if check_only else powerlaw_graph(spec, k)
        if kind == "file":
            if check_only:
                if not os.path.exists(arg):
                    raise ManifestError(f"graph file not found: {arg}")
                return None
            vertices, edges = read_edge_list(arg)
            return DynamicGraph.from_edges(edges, k=k, vertices=vertices)
    except ManifestError:
        raise
    except (ValueError, IndexError):
        raise ManifestError(f"malformed graph source {source!r}") from None
    raise ManifestError(f"unknown graph source kind {kind!r} (mesh|plc|file)")


def _injection_events(inj: Injection, graph, seed):
    kind, _, arg = inj.source.partition(":")
    if kind == "fire":
        parts = arg.split(":")
        grow = float(parts[0])
        pf = float(parts[1]) if len(parts) > 1 else 0.35
        return {inj.iteration: generate_forest_fire_changes(
            graph, ForestFireSpec(grow, pf, seed * 1_000_003 + inj.iteration))}
    return schedule(read_change_stream(arg), inj.iteration)


@dataclass
class ExperimentResult:
    manifest: ExperimentManifest
    reports: list
    engine: Engine
    vertex_results: list = field(default_factory=list)

    def rows(self):
        return [report_row(r, self.manifest.timing) for r in self.reports]


def report_row(report, timing=False) -> dict:
    d = report.as_dict()
    row = {c: d[c] for c in CSV_COLUMNS}
    row["cut_ratio"] = f"{report.cut_ratio:.6f}"
    row["balance"] = f"{report.balance:.6f}"
    row["converged"] = int(report.converged)
    if timing:
        row["elapsed"] = f"{report.elapsed:.6f}"
        row["compute_time"] = f"{report.compute_time:.6f}"
    return row


def build_engine(manifest: ExperimentManifest) -> Engine:
    graph = parse_graph_source(manifest.graph, k=manifest.partitions)
    apply_partition(graph, manifest.initial, seed=manifest.seed)
    config = HeuristicConfig(manifest.s, manifest.alpha, manifest.window, manifest.seed)
    program = make_program(manifest.workload, manifest.damping, manifest.cost)
    flush = manifest.flush_every
    if manifest.workload == "cliques" and flush % 2:
        flush = 2 * flush  # keep topology frozen across each two-superstep cycle
    return Engine(graph, config, program, adaptive=manifest.adaptive,
                  workers=manifest.workers, flush_every=flush)


def run_experiment(manifest: ExperimentManifest, out=None, results_out=None) -> ExperimentResult:
    """Run the engine per ``manifest``; optionally write the series CSV."""
    manifest.validate()
    engine = build_engine(manifest)
    pending = list(manifest.injections)
    vertex_rows = []
    program = engine.program

    def before_step(eng):
        # injections are generated from the graph as it stands when they fire
        plan = {}
        while pending and pending[0].iteration == eng.iteration + 1:
            inj = pending.pop(0)
            for when, evs in _injection_events(inj, eng.graph, manifest.seed).items():
                plan.setdefault(when, []).extend(evs)
        return plan

    def after_step(eng, report):
        if program is not None and manifest.results_every and \
                report.iteration % manifest.results_every == 0:
            for v in sorted(eng.states):
                vertex_rows.append((report.iteration, v, program.result(eng.states[v])))

    try:
        last = max((i.iteration for i in manifest.injections), default=0)
        scheduled: dict[int, list] = {}
        for _ in range(manifest.max_iterations):
            for when, evs in before_step(engine).items():
                scheduled.setdefault(when, []).extend(evs)
            step_plan = {w: scheduled.pop(w) for w in list(scheduled) if w <= engine.iteration + 1}
            if step_plan:
                engine.buffer.extend(e for w in sorted(step_plan) for e in step_plan[w])
                engine.convergence.reset()
            report = engine.run_superstep()
            after_step(engine, report)
            if manifest.until_converged and engine.idle and engine.iteration >= last \
                    and not scheduled:
                break
    finally:
        engine.close()
    result = ExperimentResult(manifest, engine.reports, engine, vertex_rows)
    if out is not None:
        write_series(out, result.rows(), manifest.timing)
    if results_out is not None:
        write_vertex_results(results_out, vertex_rows)
    return result


def write_series(path_or_file, rows, timing=False):
    columns = CSV_COLUMNS + (TIMING_COLUMNS if timing else [])
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", encoding="utf-8", newline="") if own else path_or_file
    try:
        fh.write(f"# schema={SCHEMA}\n")
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if own:
            fh.close()


def series_text(rows, timing=False) -> str:
    buf = io.StringIO()
    write_series(buf, rows, timing)
    return buf.getvalue()


def read_series(path_or_file) -> list[dict]:
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, encoding="utf-8", newline="") if own else path_or_file
    try:
        lines = [ln for ln in fh if not ln.startswith("#")]
    finally:
        if own:
            fh.close()
    rows = []
    for raw in csv.DictReader(lines):
        row = {}
        for key, value in raw.items():
            if key == "sizes":
                row[key] = tuple(int(x) for x in value.split(";") if x)
            elif key in ("cut_ratio", "balance", "elapsed", "compute_time"):
                row[key] = float(value)
            else:
                row[key] = int(value)
        rows.append(row)
    return rows


def write_vertex_results(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "vertex", "value"])
        for it, v, value in rows:
            if isinstance(value, list):
                value = "|".join(" ".join(str(x) for x in sorted(c)) for c in value)
            elif isinstance(value, float):
                value = repr(value)
            writer.writerow([it, v, value])


# -- analysis ---------------------------------------------------------------

def _as_dicts(series):
    return [r if isinstance(r, dict) else report_row(r, True) for r in series]


def _num(row, key):
    v = row.get(key)
    return float(v) if v is not None else float("nan")


def injection_iterations(series) -> list[int]:
    return [int(r["iteration"]) for r in _as_dicts(series) if int(r["changes_applied"]) > 0]


def _phase_stats(rows, tail):
    n = len(rows)
    steady = rows[n - max(1, int(round(n * tail))):] if n else []

    def mean(rs, key):
        vals = [_num(r, key) for r in rs]
        return float(np.mean(vals)) if vals else float("nan")

    return {
        "iterations": n,
        "mean_cut_ratio": mean(rows, "cut_ratio"),
        "steady_cut_ratio": mean(steady, "cut_ratio"),
        "mean_time": mean(rows, "elapsed"),
        "steady_time": mean(steady, "elapsed"),
        "migrations": int(sum(int(r["committed"]) for r in rows)),
        "remote_messages": int(sum(int(r["messages_remote"]) for r in rows)),
    }


def _relative(base, new):
    if not np.isfinite(base) or not np.isfinite(new) or base == 0:
        return 0.0 if base == new else float("nan")
    return (base - new) / base


def compare_runs(baseline, adaptive, tail=0.5):
    """Per-phase comparison of two series run under the same change schedule.

    Phases are split at every iteration where changes were applied. For
    each phase returns the baseline and adaptive statistics and the
    relative improvement ``(baseline - adaptive) / baseline`` for cut ratio
    and iteration time.
    """
    base, adap = _as_dicts(baseline), _as_dicts(adaptive)
    if [int(r["iteration"]) for r in base] != [int(r["iteration"]) for r in adap]:
        raise ValueError("series cover different iterations")
    cuts = injection_iterations(base)
    if cuts != injection_iterations(adap):
        raise ValueError("series were run under different change schedules")
    edges = [int(base[0]["iteration"])] + cuts if base else []
    phases = []
    for idx, start in enumerate(edges):
        stop = edges[idx + 1] if idx + 1 < len(edges) else None
        sel = lambda rows: [r for r in rows if int(r["iteration"]) >= start and
                            (stop is None or int(r["iteration"]) < stop)]
        b, a = _phase_stats(sel(base), tail), _phase_stats(sel(adap), tail)
        phases.append({
            "start": start, "stop": stop, "baseline": b, "adaptive": a,
            "cut_ratio_improvement": _relative(b["steady_cut_ratio"], a["steady_cut_ratio"]),
            "time_improvement": _relative(b["steady_time"], a["steady_time"]),
        })
    return phases


def recovery_iterations(series, burst, tolerance=0.10, horizon=30):
    """Iterations after ``burst`` until the cut ratio is back within ``tolerance``.

    The reference is the cut ratio at the iteration before the burst;
    returns None when it does not recover within ``horizon`` iterations.
    """
    rows = {int(r["iteration"]): _num(r, "cut_ratio") for r in _as_dicts(series)}
    if burst - 1 not in rows:
        raise ValueError(f"no row before burst iteration {burst}")
    ref = rows[burst - 1]
    for dt in range(0, horizon + 1):
        value = rows.get(burst + dt)
        if value is None:
            return None
        if value <= ref * (1 + tolerance):
            return dt
    return None


def front_loading(series):
    """Fraction of all committed migrations done in the first quarter of the run.

    The run length is taken up to the last iteration with a migration.
    """
    rows = _as_dicts(series)
    commits = np.array([int(r["committed"]) for r in rows])
    total = commits.sum()
    if total == 0:
        return 1.0
    last = int(np.flatnonzero(commits)[-1]) + 1
    quarter = max(1, int(np.ceil(0.25 * last)))
    return float(commits[:quarter].sum() / total)
