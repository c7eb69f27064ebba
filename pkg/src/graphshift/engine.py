"""Bulk-synchronous vertex-centric engine with adaptive repartitioning.

One superstep runs, in order:

1. deliver messages queued during the previous superstep;
2. run the vertex program on active vertices;
3. gated greedy migration decisions and quota admission;
4. commit migrations announced at the previous barrier, announce the new ones;
5. flush the change buffer if due;
6. publish the capacity bulletin;
7. emit a :class:`SuperstepReport`.

Every partition is hosted by one logical worker. Messages travel through
per-worker queues and are delivered one superstep after being sent.
Migrations are deferred by one superstep so that every worker's vertex
locator already points to the new home before messages target it.
"""
from __future__ import annotations

import enum
import pickle
import time
from collections import defaultdict, namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import ChangeBuffer, DynamicGraph, FlushSummary, apply_changes
from .heuristic import (ConvergenceWindow, HeuristicConfig, MigrationDecision,
                        PartitionLedger, admit_by_quota, partition_capacity,
                        propose_migrations)
from .partitioners import hash_partition

Message = namedtuple("Message", "src dst payload")
VertexView = namedtuple("VertexView", "id neighbours iteration")


class SuperstepError(RuntimeError):
    """A vertex program raised; the superstep was aborted before any commit."""


class VertexProgram:
    """Base class for per-vertex compute functions.

    ``compute`` receives a :class:`VertexView`, the vertex state and the
    list of delivered messages (sorted by sender id) and returns
    ``(state, outgoing, halt)`` where ``outgoing`` is a list of
    ``(destination, payload)`` pairs.
    """

    def init_state(self, v, graph):
        return None

    def compute(self, vertex, state, messages):
        raise NotImplementedError


class PlanStatus(enum.Enum):
    ANNOUNCED = "announced"
    COMMITTED = "committed"


@dataclass
class PlanEntry:
    vertex: int
    source: int
    destination: int
    announced_at: int
    status: PlanStatus = PlanStatus.ANNOUNCED


class MigrationPlan:
    """In-flight migrations: at most one entry per vertex."""

    def __init__(self):
        self.entries: dict[int, PlanEntry] = {}
        self.history: list[PlanEntry] = []

    def announce(self, decision: MigrationDecision, iteration: int) -> PlanEntry:
        if decision.vertex in self.entries:
            raise ValueError(f"vertex {decision.vertex} already has a migration in flight")
        entry = PlanEntry(decision.vertex, decision.source, decision.destination, iteration)
        self.entries[decision.vertex] = entry
        return entry

    def drop(self, v) -> bool:
        return self.entries.pop(v, None) is not None

    def __contains__(self, v):
        return v in self.entries

    def __len__(self):
        return len(self.entries)

    def net_inflow(self, k) -> list[int]:
        net = [0] * k
        for e in self.entries.values():
            net[e.destination] += 1
            net[e.source] -= 1
        return net


class VertexLocator:
    """Per-worker replicas of the vertex -> partition routing table."""

    def __init__(self, assignment, workers: int):
        self.replicas = [dict(assignment) for _ in range(workers)]

    def lookup(self, v, worker=0):
        return self.replicas[worker].get(v)

    def set(self, v, partition):
        for r in self.replicas:
            r[v] = partition

    def remove(self, v):
        for r in self.replicas:
            r.pop(v, None)

    def coherent_with(self, mapping) -> bool:
        return all(r == mapping for r in self.replicas)


@dataclass
class CapacityBulletin:
    iteration: int
    remaining: list[int]


@dataclass
class SuperstepReport:
    iteration: int
    vertices: int
    edges: int
    cut_edges: int
    cut_ratio: float
    proposed: int
    announced: int
    committed: int
    deferred: int
    dropped: int
    sizes: tuple
    capacity: int
    balance: float
    messages_sent: int
    messages_delivered: int
    messages_remote: int
    envelopes: int
    dead_letters: int
    lost: int
    changes_applied: int
    changes_skipped: int
    converged: bool
    elapsed: float = 0.0
    compute_time: float = 0.0

    def as_dict(self):
        d = asdict(self)
        d["sizes"] = ";".join(str(s) for s in self.sizes)
        return d


@dataclass
class MessageTotals:
    sent: int = 0
    delivered: int = 0
    dead_letters: int = 0
    lost: int = 0
    rerouted: int = 0
    remote: int = 0

    @property
    def queued_balance(self):
        return self.sent - self.delivered - self.dead_letters - self.lost


def route_message(msg: Message, locator: VertexLocator, queues, worker=0):
    """Enqueue ``msg`` on the worker hosting its destination; None if unknown."""
    dest = locator.lookup(msg.dst, worker)
    if dest is None:
        return None
    queues[dest].append(msg)
    return dest


def commit_migrations(plan: MigrationPlan, graph: DynamicGraph, ledger: PartitionLedger,
                      locator: VertexLocator, before: int):
    """Commit entries announced before iteration ``before``.

    Returns ``(committed, dropped)``; entries for vertices no longer in the
    graph are dropped.
    """
    committed = dropped = 0
    for v in [v for v, e in plan.entries.items() if e.announced_at < before]:
        e = plan.entries.pop(v)
        if v not in graph:
            dropped += 1
            continue
        graph.assignment[v] = e.destination
        ledger.size[e.source] -= 1
        ledger.size[e.destination] += 1
        locator.set(v, e.destination)
        e.status = PlanStatus.COMMITTED
        plan.history.append(e)
        committed += 1
    ledger.pending = plan.net_inflow(ledger.k)
    return committed, dropped


def broadcast_capacity(ledger: PartitionLedger, plan: MigrationPlan, iteration=0) -> CapacityBulletin:
    """Predicted remaining capacity once every announced migration has landed."""
    net = plan.net_inflow(ledger.k)
    return CapacityBulletin(iteration, [
        ledger.capacity[i] - (ledger.size[i] + net[i]) for i in range(ledger.k)])


class Engine:
    def __init__(self, graph: DynamicGraph, config: HeuristicConfig | None = None,
                 program: VertexProgram | None = None, *, adaptive=True, workers=1,
                 flush_every=1, capacities=None, deferred=True, serialize_remote=True):
        self.graph = graph
        self.k = graph.k
        self.config = config or HeuristicConfig()
        self.program = program
        self.adaptive = adaptive
        self.workers = max(1, workers)
        self.deferred = deferred
        self.serialize_remote = serialize_remote
        self.buffer = ChangeBuffer(flush_every)
        self.iteration = 0
        self._fixed_capacity = capacities is not None
        if capacities is None:
            cap = partition_capacity(graph.num_vertices, self.k, self.config.alpha)
            capacities = [cap] * self.k
        self.ledger = PartitionLedger(list(capacities), graph.partition_sizes())
        self.plan = MigrationPlan()
        self.locator = VertexLocator(graph.assignment, self.k)
        self.bulletin = broadcast_capacity(self.ledger, self.plan, 0)
        self.convergence = ConvergenceWindow(self.config.window)
        self.queues: list[list[Message]] = [[] for _ in range(self.k)]
        self.totals = MessageTotals()
        self.states = {}
        self.halted: set[int] = set()
        self.reports: list[SuperstepReport] = []
        self.pair_admissions = defaultdict(int)
        self.pair_commits = defaultdict(int)
        self.last_flush = FlushSummary()
        self._pool = ThreadPoolExecutor(self.workers) if self.workers > 1 else None
        if program is not None:
            for v in sorted(graph.vertices()):
                self.states[v] = program.init_state(v, graph)

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    # -- phases ---------------------------------------------------------

    def _deliver(self):
        inbox = defaultdict(list)
        delivered = dead = lost = 0
        a = self.graph.assignment
        for p, queue in enumerate(self.queues):
            for msg in queue:
                host = a.get(msg.dst)
                if host is None:
                    dead += 1
                elif host != p:
                    if self.deferred:
                        self.totals.rerouted += 1
                        inbox[msg.dst].append(msg)
                        delivered += 1
                    else:
                        lost += 1
                else:
                    inbox[msg.dst].append(msg)
                    delivered += 1
        self.queues = [[] for _ in range(self.k)]
        for msgs in inbox.values():
            msgs.sort(key=lambda m: m.src)
        return inbox, delivered, dead, lost

    def _compute_partition(self, p, members, inbox):
        out_states, out_msgs, halts = {}, [], []
        program, graph, t = self.program, self.graph, self.iteration
        for v in members:
            msgs = inbox.get(v, [])
            if v in self.halted and not msgs:
                continue
            view = VertexView(v, tuple(sorted(graph.adj[v])), t)
            try:
                state, outgoing, halt = program.compute(view, self.states.get(v), msgs)
            except Exception as exc:
                raise SuperstepError(f"vertex {v} failed at iteration {t}: {exc!r}") from exc
            out_states[v] = state
            halts.append((v, bool(halt)))
            out_msgs.extend(Message(v, dst, payload) for dst, payload in outgoing)
        return out_states, out_msgs, halts

    def _compute(self, inbox):
        if self.program is None:
            return 0, 0, 0, 0, 0.0
        start = time.perf_counter()
        by_part = [[] for _ in range(self.k)]
        for v in sorted(self.graph.vertices()):
            by_part[self.graph.assignment[v]].append(v)
        jobs = [(p, by_part[p], inbox) for p in range(self.k)]
        if self._pool is not None:
            results = list(self._pool.map(lambda j: self._compute_partition(*j), jobs))
        else:
            results = [self._compute_partition(*j) for j in jobs]
        # all compute succeeded: stage is safe to apply
        sent = remote = dead = 0
        envelopes = defaultdict(list)
        for p, (states, msgs, halts) in enumerate(results):
            self.states.update(states)
            for v, h in halts:
                if h:
                    self.halted.add(v)
                else:
                    self.halted.discard(v)
            for msg in msgs:
                sent += 1
                dest = self.locator.lookup(msg.dst, p)
                if dest is None:
                    dead += 1
                elif dest == p:
                    self.queues[p].append(msg)
                else:
                    envelopes[(p, dest)].append(msg)
                    remote += 1
        for (p, dest), batch in sorted(envelopes.items()):
            if self.serialize_remote:
                batch = pickle.loads(pickle.dumps(batch, pickle.HIGHEST_PROTOCOL))
            self.queues[dest].extend(batch)
        return sent, remote, dead, len(envelopes), time.perf_counter() - start

    def _decide(self):
        """Propose and admit migrations from the iteration-start snapshot."""
        csr = self.graph.csr()
        n = len(csr.ids)
        rng = np.random.default_rng([self.config.seed, self.iteration])
        draws = rng.random((n, 2))
        if not self.adaptive or n == 0 or self.k < 2:
            return [], 0, 0
        ids = csr.ids.tolist()
        rep = self.locator.replicas[0]
        part = np.fromiter((rep[v] for v in ids), dtype=np.int64, count=n)
        gate = draws[:, 0] < self.config.s
        if self.plan.entries:
            gate &= np.fromiter((v not in self.plan.entries for v in ids), dtype=bool, count=n)
        rem = np.maximum(np.array(self.bulletin.remaining, dtype=np.int64), 0)
        open_quota = rem // (self.k - 1)
        tie_draws = draws[:, 1] if self.config.tie_break == "random" else None
        rows, dst, gain = propose_migrations(csr.indptr, csr.indices, part, self.k, gate,
                                             open_quota > 0, tie_draws)
        if len(rows) == 0:
            return [], 0, 0
        src = part[rows]
        quotas = np.repeat(open_quota[None, :], self.k, axis=0)
        np.fill_diagonal(quotas, 0)
        ok = admit_by_quota(src, dst, gain, csr.ids[rows], quotas)
        admitted = [MigrationDecision(int(v), int(s), int(d), int(g)) for v, s, d, g in
                    zip(csr.ids[rows][ok], src[ok], dst[ok], gain[ok])]
        return admitted, len(rows), int((~ok).sum())

    def _announce(self, admitted):
        for d in admitted:
            self.plan.announce(d, self.iteration)
            self.pair_admissions[(d.source, d.destination)] += 1
            # peers learn the new home at this barrier; messages sent next superstep go there
            self.locator.set(d.vertex, d.destination)
        self.ledger.pending = self.plan.net_inflow(self.k)

    def _commit(self, before):
        pending = [e for e in self.plan.entries.values() if e.announced_at < before]
        committed, dropped = commit_migrations(self.plan, self.graph, self.ledger,
                                               self.locator, before)
        for e in pending:
            if e.status is PlanStatus.COMMITTED:
                self.pair_commits[(e.source, e.destination)] += 1
        return committed, dropped

    def _placer(self, v):
        p = hash_partition(v, self.k)
        for step in range(self.k):
            q = (p + step) % self.k
            if self.ledger.remaining(q) > 0:
                self.ledger.size[q] += 1
                return q
        q = int(np.argmin(self.ledger.size))
        self.ledger.size[q] += 1
        return q

    def _flush(self):
        summary = FlushSummary()
        events = self.buffer.drain()
        if not events:
            return summary, 0
        if not self._fixed_capacity:
            fresh = {x for e in events for x in (e.u, e.v)
                     if x is not None and x not in self.graph}
            cap = partition_capacity(self.graph.num_vertices + len(fresh), self.k,
                                     self.config.alpha)
            self.ledger.capacity = [max(c, cap) for c in self.ledger.capacity]
        affected = apply_changes(self.graph, events, self._placer, summary)
        self.ledger.size = self.graph.partition_sizes()
        dropped = 0
        for v in summary.removed_vertices:
            if self.plan.drop(v):
                dropped += 1
            self.locator.remove(v)
            self.states.pop(v, None)
            self.halted.discard(v)
        for v in summary.added_vertices:
            if v in self.graph:
                self.locator.set(v, self.graph.assignment[v])
                if self.program is not None:
                    self.states[v] = self.program.init_state(v, self.graph)
        for v in affected:
            self.halted.discard(v)
        self.ledger.pending = self.plan.net_inflow(self.k)
        return summary, dropped

    # -- driver ---------------------------------------------------------

    def run_superstep(self) -> SuperstepReport:
        self.iteration += 1
        t = self.iteration
        start = time.perf_counter()
        inbox, delivered, dead_in, lost = self._deliver()
        try:
            sent, remote, dead_out, envelopes, compute_time = self._compute(inbox)
        except SuperstepError:
            self.iteration -= 1
            raise
        admitted, proposed, deferred = self._decide()
        if self.deferred:
            committed, dropped = self._commit(before=t)
            self._announce(admitted)
        else:
            self._announce(admitted)
            committed, dropped = self._commit(before=t + 1)
        summary, dropped_by_delete = (self._flush() if self.buffer.due(t)
                                      else (FlushSummary(), 0))
        self.last_flush = summary
        dropped += dropped_by_delete
        self.bulletin = broadcast_capacity(self.ledger, self.plan, t)
        converged = self.convergence.update(committed)

        csr = self.graph.csr()
        a = self.graph.assignment
        n = len(csr.ids)
        if n:
            part = np.fromiter((a[v] for v in csr.ids.tolist()), dtype=np.int64, count=n)
            cut = int((part[csr.rows] != part[csr.indices]).sum()) // 2
        else:
            cut = 0
        m = self.graph.num_edges
        sizes = tuple(self.ledger.size)
        ideal = n / self.k if n else 0
        dead = dead_in + dead_out
        self.totals.sent += sent
        self.totals.delivered += delivered
        self.totals.dead_letters += dead
        self.totals.lost += lost
        self.totals.remote += remote
        report = SuperstepReport(
            iteration=t, vertices=n, edges=m, cut_edges=cut,
            cut_ratio=cut / m if m else 0.0, proposed=proposed,
            announced=len(admitted), committed=committed, deferred=deferred,
            dropped=dropped, sizes=sizes, capacity=max(self.ledger.capacity),
            balance=max(sizes) / ideal if ideal else 0.0,
            messages_sent=sent, messages_delivered=delivered, messages_remote=remote,
            envelopes=envelopes, dead_letters=dead, lost=lost,
            changes_applied=summary.applied, changes_skipped=summary.skipped,
            converged=converged, elapsed=time.perf_counter() - start,
            compute_time=compute_time)
        self.reports.append(report)
        return report

    @property
    def idle(self) -> bool:
        """No buffered changes, no migrations in flight and migrations converged."""
        return self.convergence.converged and not self.plan.entries and not len(self.buffer)

    def run(self, max_iterations=500, until_converged=True, schedule=None, callback=None):
        """Run supersteps; ``schedule`` maps iteration -> events pushed before it runs."""
        schedule = schedule or {}
        last_injection = max(schedule, default=0)
        for _ in range(max_iterations):
            nxt = self.iteration + 1
            if nxt in schedule:
                self.buffer.extend(schedule[nxt])
                self.convergence.reset()
            report = self.run_superstep()
            if callback is not None:
                callback(self, report)
            if until_converged and self.idle and self.iteration >= last_injection:
                break
        return self.reports

    def check_invariants(self):
        self.graph.check_invariants()
        sizes = self.graph.partition_sizes()
        assert sizes == self.ledger.size, (sizes, self.ledger.size)
        assert sum(sizes) == self.graph.num_vertices
        for i in range(self.k):
            assert sizes[i] <= self.ledger.capacity[i], f"partition {i} over capacity"
        expected = dict(self.graph.assignment)
        for v, e in self.plan.entries.items():
            expected[v] = e.destination
        assert self.locator.coherent_with(expected), "locator out of sync"
