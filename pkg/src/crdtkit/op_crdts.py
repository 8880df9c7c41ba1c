"""Operation-based CRDTs: a side-effect-free generator and a replicated effector.

``generate`` runs at the origin replica against its current state and the
middleware's delivered-version vector; it returns an :class:`Effector`.
``effect`` applies an effector at any replica and requires causal delivery.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, ClassVar, Optional

from crdtkit import codec
from crdtkit.causality import Dot, HybridTimestamp, ReplicaId, VersionVector, next_dot
from crdtkit.state_crdts import dot_unwire, dot_wire, ts_unwire, ts_wire, vv_wire


class DependencyViolation(RuntimeError):
    """An effector reached ``effect`` before its causal dependencies."""


@dataclass(frozen=True)
class Effector:
    origin: ReplicaId
    seq: int
    deps: VersionVector
    kind: str
    payload: Any
    ts: Optional[HybridTimestamp] = None

    @property
    def id(self) -> Dot:
        return Dot(self.origin, self.seq)

    def happened_before(self, other: Effector) -> bool:
        return self.seq <= other.deps[self.origin]

    def concurrent_with(self, other: Effector) -> bool:
        return self.id != other.id and not self.happened_before(other) and not other.happened_before(self)


def deliverable(eff: Effector, delivered: VersionVector) -> bool:
    """Causal delivery condition against a replica's delivered vector."""
    if delivered[eff.origin] != eff.seq - 1:
        return False
    return all(n <= delivered[r] for r, n in eff.deps.items() if r != eff.origin)


# payload wire forms are kind-specific; the codec handles the primitives

def _payload_wire(kind: str, payload):
    if kind == "add" and isinstance(payload, tuple) and len(payload) == 2 and isinstance(payload[1], Dot):
        return (payload[0], dot_wire(payload[1]))
    if kind == "rmv":
        return (payload[0], frozenset(dot_wire(d) for d in payload[1]))
    if kind == "wr":
        return (payload[0], ts_wire(payload[1]))
    if kind in ("inc", "dec"):
        return (payload[0], ts_wire(payload[1])) if isinstance(payload, tuple) else payload
    return payload


def _payload_unwire(kind: str, w):
    if kind == "add" and isinstance(w, tuple):
        return (w[0], dot_unwire(w[1]))
    if kind == "rmv":
        return (w[0], frozenset(dot_unwire(d) for d in w[1]))
    if kind == "wr":
        return (w[0], ts_unwire(w[1]))
    if kind in ("inc", "dec") and isinstance(w, tuple):
        return (w[0], ts_unwire(w[1]))
    return w


def encode_effector(eff: Effector) -> bytes:
    return codec.encode((eff.origin, eff.seq, vv_wire(eff.deps), eff.kind,
                         _payload_wire(eff.kind, eff.payload), ts_wire(eff.ts)))


def decode_effector(buf: bytes) -> Effector:
    origin, seq, deps, kind, payload, ts = codec.decode(buf)
    return Effector(origin, seq, VersionVector(deps), kind, _payload_unwire(kind, payload), ts_unwire(ts))


class OpCRDT:
    TAG: ClassVar[str] = ""

    def generate(self, op: tuple, origin: ReplicaId, delivered: VersionVector,
                 ts: Optional[HybridTimestamp] = None) -> Effector:
        kind, payload = self._prepare(op, origin, delivered, ts)
        return Effector(origin, delivered[origin] + 1, delivered, kind, payload, ts)

    def _prepare(self, op, origin, delivered, ts):  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class OpCounter(OpCRDT):
    TAG: ClassVar[str] = "opcounter"
    value: int = 0

    def _prepare(self, op, origin, delivered, ts):
        name, *args = op
        n = args[0] if args else 1
        if name == "add":
            return "add", n
        if name == "inc":
            return "add", n
        if name == "dec":
            return "add", -n
        raise ValueError(f"unsupported counter operation {name!r}")

    def effect(self, eff: Effector) -> OpCounter:
        return OpCounter(self.value + eff.payload)

    def query(self) -> int:
        return self.value


@dataclass(frozen=True)
class OpWWCounter(OpCRDT):
    """Counter with write-wins ``wr``: inc/dec not causally after the winning write are dropped.

    Every inc/dec carries the timestamp of the write its origin had in place,
    so ``delta`` only accumulates effects that followed the current base write.
    """

    TAG: ClassVar[str] = "opwwcounter"
    base_ts: Optional[HybridTimestamp] = None
    base: int = 0
    delta: int = 0

    def _prepare(self, op, origin, delivered, ts):
        name, *args = op
        if name == "wr":
            if ts is None:
                raise ValueError("a write needs a timestamp")
            return "wr", (args[0], ts)
        if name in ("inc", "dec"):
            n = args[0] if args else 1
            return "inc", (n if name == "inc" else -n, self.base_ts)
        raise ValueError(f"unsupported counter operation {name!r}")

    def effect(self, eff: Effector) -> OpWWCounter:
        if eff.kind == "wr":
            v, ts = eff.payload
            if self.base_ts is None or ts > self.base_ts:
                # causal delivery: nothing that follows this write has been applied yet
                return OpWWCounter(ts, v, 0)
            return self
        n, after = eff.payload
        if after == self.base_ts:
            return OpWWCounter(self.base_ts, self.base, self.delta + n)
        return self

    @property
    def value(self) -> int:
        return self.base + self.delta

    def query(self) -> int:
        return self.value


@dataclass(frozen=True)
class OpAWSet(OpCRDT):
    TAG: ClassVar[str] = "opawset"
    entries: frozenset = frozenset()  # (element, dot)

    def _prepare(self, op, origin, delivered, ts):
        name, e = op
        if name == "add":
            return "add", (e, next_dot(delivered, origin))
        if name == "rmv":
            return "rmv", (e, frozenset(d for x, d in self.entries if x == e))
        raise ValueError(f"unsupported set operation {name!r}")

    def effect(self, eff: Effector) -> OpAWSet:
        e, arg = eff.payload
        if eff.kind == "add":
            return OpAWSet(self.entries | {(e, arg)})
        return OpAWSet(frozenset(x for x in self.entries if not (x[0] == e and x[1] in arg)))

    def elements(self) -> frozenset:
        return frozenset(x for x, _ in self.entries)

    def query(self) -> frozenset:
        return self.elements()


def generate(state, op: tuple, origin: ReplicaId, delivered: VersionVector,
             ts: Optional[HybridTimestamp] = None) -> Effector:
    return state.generate(op, origin, delivered, ts)


def effect(state, eff: Effector):
    return state.effect(eff)


def commutes(a: Effector, b: Effector, state) -> bool:
    return state.effect(a).effect(b) == state.effect(b).effect(a)


OP_TYPES = (OpCounter, OpWWCounter, OpAWSet)
