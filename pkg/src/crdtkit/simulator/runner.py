"""Deterministic execution of scenarios under the three sync models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from crdtkit import delta as deltamod
from crdtkit.causality import Dot, HybridTimestamp, VersionVector, hlc_local, hlc_receive, hlc_zero, vv_join
from crdtkit.extensions import BoundedCounter, TopKSet
from crdtkit.op_crdts import DependencyViolation, Effector, commutes, deliverable, encode_effector
from crdtkit.oracle import INIT_REPLICA, History, OpEvent
from crdtkit.simulator.network import NetConfig, Network
from crdtkit.simulator.scenario import Scenario
from crdtkit.simulator.trace import Trace
from crdtkit.simulator.types import Rejected, TypeAdapter
from crdtkit.state_crdts import encode_state

MAX_SYNC_ROUNDS = 500


@dataclass
class RunStats:
    updates: int = 0
    rejected: int = 0
    commute_pairs: int = 0
    commute_failures: list = field(default_factory=list)
    min_local_rights: Optional[int] = None
    min_value: Optional[int] = None
    ever_top: set = field(default_factory=set)
    transmitted: set = field(default_factory=set)
    sync_rounds: int = 0
    stalled: bool = False


@dataclass
class RunResult:
    scenario: Scenario
    states: dict
    trace: Trace
    history: History
    queries: list  # (tick, rid, value, updates applied so far)
    applied: list  # (rid, op) of accepted updates, in execution order
    stats: RunStats
    net: object
    adapter: TypeAdapter
    replicas: dict = field(repr=False, default_factory=dict)

    def query(self, rid):
        return self.adapter.query(self.states[rid])


# -- replicas ------------------------------------------------------------------


class Replica:
    """Shared bookkeeping: clock, knowledge (event-counter vector), event numbering."""

    def __init__(self, rid, adapter, state):
        self.rid = rid
        self.adapter = adapter
        self.state = state
        self.clock = hlc_zero(rid)
        self.knowledge = VersionVector()
        self.events = 0

    def fork(self, rid):
        clone = self.__class__.__new__(self.__class__)
        clone.__dict__.update(self.__dict__)
        clone.rid = rid
        clone.clock = HybridTimestamp(self.clock.physical, self.clock.logical, rid)
        clone.events = 0
        return clone

    def view(self):
        return self.adapter.sync_view(self.state)

    def learn(self, knowledge, clock, tick):
        self.knowledge = vv_join(self.knowledge, knowledge)
        self.clock = hlc_receive(self.clock, clock, tick)


class StateReplica(Replica):
    def update(self, op, ts):
        self.state = self.adapter.apply(self.state, self.rid, op, ts)

    def outgoing(self, peer):
        view = self.view()
        return ("state", view, len(encode_state(view)))

    def incoming(self, src, payload, runner):
        self.state = self.state.merge(payload)
        return None

    def on_reply(self, src, reply):
        pass


class DeltaModeReplica(Replica):
    def __init__(self, rid, adapter, state, peers):
        self.inner = deltamod.DeltaReplica(rid, state, peers)
        super().__init__(rid, adapter, state)

    def fork(self, rid):
        clone = super().fork(rid)
        clone.inner = deltamod.DeltaReplica(rid, self.inner.state)
        return clone

    def set_peers(self, peers):
        self.inner.peers = sorted(p for p in peers if p != self.rid)

    @property
    def state(self):
        return self.inner.state

    @state.setter
    def state(self, value):
        self.inner.state = value

    def update(self, op, ts):
        self.inner.update((op[0], self.rid, *op[1:]))

    def outgoing(self, peer):
        msg = self.inner.prepare(peer)
        if msg is None:
            return None
        return (type(msg).__name__, msg, len(deltamod.encode_message(msg)))

    def incoming(self, src, payload, runner):
        return self.inner.receive(payload)

    def on_reply(self, src, reply):
        self.inner.on_ack(src, reply)


class OpReplica(Replica):
    def __init__(self, rid, adapter, state):
        super().__init__(rid, adapter, state)
        self.delivered = VersionVector()
        self.log: list[Effector] = []
        self.pending: dict[Dot, Effector] = {}
        self.peer_acked: dict = {}

    def fork(self, rid):
        clone = super().fork(rid)
        clone.log = list(self.log)
        clone.pending = {}
        clone.peer_acked = {}
        clone.base_acked = self.delivered
        return clone

    def update(self, op, ts):
        eff = self.state.generate(op, self.rid, self.delivered, ts)
        self._apply(eff)

    def _apply(self, eff):
        if not deliverable(eff, self.delivered):
            raise DependencyViolation(f"{eff.id} applied at {self.rid} before its dependencies")
        self.state = self.state.effect(eff)
        self.delivered = self.delivered.with_entry(eff.origin, eff.seq)
        self.log.append(eff)

    def outgoing(self, peer):
        acked = self.peer_acked.get(peer, getattr(self, "base_acked", VersionVector()))
        batch = tuple(e for e in self.log if e.seq > acked[e.origin])
        if not batch:
            return None
        return ("effectors", batch, sum(len(encode_effector(e)) for e in batch))

    def incoming(self, src, batch, runner):
        for eff in batch:
            if eff.seq <= self.delivered[eff.origin] or eff.id in self.pending:
                continue
            self.pending[eff.id] = eff
        while True:
            ready = [e for _, e in sorted(self.pending.items()) if deliverable(e, self.delivered)]
            if not ready:
                break
            eff = ready[0]
            for other in ready[1:]:
                if eff.concurrent_with(other):
                    runner.check_commute(self, eff, other)
            del self.pending[eff.id]
            self._apply(eff)
            runner.on_effect_delivered(self, eff)
        return self.delivered

    def on_reply(self, src, reply):
        prev = self.peer_acked.get(src, getattr(self, "base_acked", VersionVector()))
        self.peer_acked[src] = vv_join(prev, reply)


# -- runner --------------------------------------------------------------------


class Runner:
    def __init__(self, scenario: Scenario, adapter: Optional[TypeAdapter] = None, seed: Optional[int] = None):
        self.scenario = scenario
        self.adapter = adapter or scenario.adapter
        self.seed = scenario.seed if seed is None else seed
        self.trace = Trace()
        self.net = Network(self.seed, self.trace)
        self.tick = 0
        self.events: list[OpEvent] = []
        self.edges: set = set()
        self.queries: list = []
        self.applied: list = []
        self.stats = RunStats()
        self.replicas: dict = {}
        self._setup()

    # setup / events

    def _make(self, rid, state):
        model = self.scenario.sync_model
        if model == "state":
            return StateReplica(rid, self.adapter, state)
        if model == "delta":
            return DeltaModeReplica(rid, self.adapter, state, self.scenario.replicas)
        if model == "op":
            return OpReplica(rid, self.adapter, state)
        raise ValueError(f"unknown sync model {model!r}")

    def _setup(self):
        sc = self.scenario
        init = self._make(INIT_REPLICA, self.adapter.initial(sc.params, sc.replicas))
        for kind, arg, score in self.adapter.init_events(sc.params):
            self._record(init, kind, arg, score)
        for op in sc.init:
            self._update(init, op, trace=False)
        for rid in sc.replicas:
            self.replicas[rid] = init.fork(rid)
        if sc.sync_model == "delta":
            for r in self.replicas.values():
                r.set_peers(sc.replicas)
        self._observe()

    def _record(self, replica, kind, arg, score, ts=None):
        if ts is None:
            replica.clock = hlc_local(replica.clock, self.tick)
            ts = replica.clock
        replica.events += 1
        d = Dot(replica.rid, replica.events)
        for r, n in replica.knowledge.items():
            self.edges.add((Dot(r, n), d))
        self.events.append(OpEvent(d, kind, arg, ts, score))
        replica.knowledge = replica.knowledge.with_entry(replica.rid, replica.events)
        return d

    def _update(self, replica, op, trace=True):
        ts = hlc_local(replica.clock, self.tick)
        try:
            replica.update(op, ts)
        except Rejected as exc:
            self.stats.rejected += 1
            if trace:
                self.trace.emit(self.tick, "update-rejected", replica.rid, _op_text(op), str(exc))
            return None
        replica.clock = ts
        self.applied.append((replica.rid, op))
        self.stats.updates += 1
        ev = self.adapter.event(op)
        d = None
        if ev is not None:
            d = self._record(replica, *ev, ts=ts)
        if trace:
            self.trace.emit(self.tick, "update-applied", replica.rid, str(d) if d else "-", _op_text(op), str(ts))
        return d

    # safety / bookkeeping probes

    def _observe(self):
        for r in self.replicas.values():
            s = r.state
            if isinstance(s, BoundedCounter):
                low = min(s.local_rights(x) for x in self.scenario.replicas)
                if self.stats.min_local_rights is None or low < self.stats.min_local_rights:
                    self.stats.min_local_rights = low
                if self.stats.min_value is None or s.value < self.stats.min_value:
                    self.stats.min_value = s.value
            elif isinstance(s, TopKSet):
                self.stats.ever_top.update(x[2] for x in s.top)

    def check_commute(self, replica, a, b):
        self.stats.commute_pairs += 1
        if not commutes(a, b, replica.state):
            self.stats.commute_failures.append((replica.rid, a.id, b.id))

    def on_effect_delivered(self, replica, eff):
        replica.knowledge = replica.knowledge.with_entry(eff.origin, max(replica.knowledge[eff.origin], eff.seq))
        replica.clock = hlc_receive(replica.clock, eff.ts, self.tick)

    # network

    def _send(self, src, dst):
        a = self.replicas[src]
        out = a.outgoing(dst)
        if out is None:
            return
        kind, payload, nbytes = out
        note = ""
        if isinstance(payload, TopKSet):
            dots = sorted(x[2] for x in payload.top)
            self.stats.transmitted.update(dots)
            note = "entries=" + ",".join(str(d) for d in dots)
        self.net.send(self.tick, src, dst, "data", kind, (payload, a.knowledge, a.clock), nbytes, note)

    def _deliver_due(self):
        while True:
            msg = self.net.pop_due(self.tick)
            if msg is None:
                break
            self.trace.emit(self.tick, "message-delivered", msg.src, msg.dst, f"m{msg.id}")
            dst = self.replicas[msg.dst]
            if msg.channel == "ack":
                dst.on_reply(msg.src, msg.payload)
                continue
            payload, knowledge, clock = msg.payload
            reply = dst.incoming(msg.src, payload, self)
            if self.scenario.sync_model != "op":
                dst.learn(knowledge, clock, self.tick)
            if reply is not None:
                self.net.send(self.tick, msg.dst, msg.src, "ack", "ack", reply, 8)
            self._observe()

    def _advance(self):
        self.tick += 1
        self._deliver_due()

    def _converged(self) -> bool:
        reps = list(self.replicas.values())
        first = reps[0]
        if self.scenario.sync_model == "op":
            # own updates are delivered locally at once, so equal vectors mean complete logs
            return all(r.delivered == first.delivered and not r.pending for r in reps)
        view = first.view()
        return all(r.knowledge == first.knowledge for r in reps) and all(r.view() == view for r in reps[1:])

    def full_sync(self):
        rids = self.scenario.replicas
        for _ in range(MAX_SYNC_ROUNDS):
            if self._converged():
                return
            self.stats.sync_rounds += 1
            for a in rids:
                for b in rids:
                    if a != b:
                        self._send(a, b)
            self._advance()
        self.stats.stalled = True

    # main loop

    def step(self, step: dict):
        if "net" in step:
            self.net.config = NetConfig(**step["net"])
            return
        if step.get("sync") == "full":
            self.full_sync()
            return
        self.tick += 1
        if "sync" in step:
            src, dst = step["sync"]
            self._send(src, dst)
        elif step.get("do") == "query":
            rid = step["at"]
            value = self.adapter.query(self.replicas[rid].state)
            self.queries.append((self.tick, rid, value, len(self.applied)))
            self.trace.emit(self.tick, "query-result", rid, self.adapter.format_query(value))
        else:
            rid = step["at"]
            self._update(self.replicas[rid], (step["do"], *step.get("args", ())))
        self._deliver_due()
        self._observe()

    def run(self) -> RunResult:
        for st in self.scenario.script:
            self.step(st)
        values = [self.adapter.format_query(self.adapter.query(r.state)) for r in self.replicas.values()]
        verdict = "equal" if len(set(values)) == 1 else "diverged"
        self.trace.emit(self.tick, "convergence-check", verdict, *values)
        history = History(tuple(self.events), frozenset(self.edges))
        return RunResult(
            scenario=self.scenario,
            states={rid: r.state for rid, r in self.replicas.items()},
            trace=self.trace,
            history=history,
            queries=self.queries,
            applied=self.applied,
            stats=self.stats,
            net=self.net.stats,
            adapter=self.adapter,
            replicas=self.replicas,
        )


def _op_text(op) -> str:
    return op[0] + "(" + ",".join(repr(a) for a in op[1:]) + ")"


def run(scenario: Scenario, seed: Optional[int] = None, adapter: Optional[TypeAdapter] = None) -> RunResult:
    return Runner(scenario, adapter=adapter, seed=seed).run()
