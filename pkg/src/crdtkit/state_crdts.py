"""State-based CRDTs: partially ordered payloads, inflationary updates, merge = join.

Every type is an immutable value: updates return a new state. ``leq`` is the
lattice order and ``merge`` its least upper bound. The causal-context types
(:class:`MVRegister`, :class:`AWSet`, :class:`RWSet`) store only live entries
plus a :class:`~crdtkit.causality.DotContext`; an entry present on one side
whose dot the other side has already seen was deleted there, and the merge
drops it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, Optional

from crdtkit import codec
from crdtkit.causality import (
    Dot,
    DotContext,
    HybridTimestamp,
    ReplicaId,
    VersionVector,
    vv_join,
    vv_leq,
)
from crdtkit.codec import canon_key, canon_sorted

_REGISTRY: dict[str, type] = {}


def register(cls):
    _REGISTRY[cls.TAG] = cls
    return cls


def merge(a, b):
    if type(a) is not type(b):
        raise TypeError(f"cannot merge {type(a).__name__} with {type(b).__name__}")
    return a.merge(b)


def leq(a, b) -> bool:
    if type(a) is not type(b):
        raise TypeError(f"cannot compare {type(a).__name__} with {type(b).__name__}")
    return a.leq(b)


def encode_state(state) -> bytes:
    return codec.encode((state.TAG, state.to_wire()))


def decode_state(buf: bytes):
    tag, body = codec.decode(buf)
    try:
        cls = _REGISTRY[tag]
    except KeyError:
        raise codec.DecodeError(f"unknown state type {tag!r}") from None
    return cls.from_wire(body)


# wire helpers shared with op_crdts / delta / extensions

def dot_wire(d: Dot):
    return (d.replica, d.counter)


def dot_unwire(w) -> Dot:
    return Dot(w[0], w[1])


def ts_wire(ts: Optional[HybridTimestamp]):
    return None if ts is None else (ts.physical, ts.logical, ts.replica)


def ts_unwire(w) -> Optional[HybridTimestamp]:
    return None if w is None else HybridTimestamp(*w)


def vv_wire(vv) -> dict:
    return dict(vv.items())


def ctx_wire(ctx: DotContext):
    return (vv_wire(ctx.vv), frozenset(dot_wire(d) for d in ctx.cloud))


def ctx_unwire(w) -> DotContext:
    return DotContext(VersionVector(w[0]), (dot_unwire(d) for d in w[1]))


def causal_join(e1: frozenset, c1: DotContext, e2: frozenset, c2: DotContext,
                dot_of: Callable[[Any], Dot]) -> tuple[frozenset, DotContext]:
    keep = e1 & e2
    keep |= {x for x in e1 - e2 if not c2.seen(dot_of(x))}
    keep |= {x for x in e2 - e1 if not c1.seen(dot_of(x))}
    return frozenset(keep), c1.join(c2)


def causal_leq(e1: frozenset, c1: DotContext, e2: frozenset, c2: DotContext,
               dot_of: Callable[[Any], Dot]) -> bool:
    if not c1.leq(c2):
        return False
    if any(not c2.seen(dot_of(x)) for x in e1 - e2):
        return False
    return not any(c1.seen(dot_of(x)) for x in e2 - e1)


@register
@dataclass(frozen=True)
class GCounter:
    TAG: ClassVar[str] = "gcounter"
    counts: VersionVector = field(default_factory=VersionVector)

    @property
    def value(self) -> int:
        return sum(self.counts.values())

    def inc(self, r: ReplicaId, n: int = 1) -> GCounter:
        if n < 0:
            raise ValueError("grow-only counter cannot decrease")
        return GCounter(self.counts.with_entry(r, self.counts[r] + n))

    def inc_delta(self, r: ReplicaId, n: int = 1) -> GCounter:
        return GCounter(VersionVector({r: self.counts[r] + n}))

    def merge(self, other: GCounter) -> GCounter:
        return GCounter(vv_join(self.counts, other.counts))

    def leq(self, other: GCounter) -> bool:
        return vv_leq(self.counts, other.counts)

    def query(self) -> int:
        return self.value

    def to_wire(self):
        return vv_wire(self.counts)

    @classmethod
    def from_wire(cls, w):
        return cls(VersionVector(w))


@register
@dataclass(frozen=True)
class PNCounter:
    TAG: ClassVar[str] = "pncounter"
    incs: GCounter = field(default_factory=GCounter)
    decs: GCounter = field(default_factory=GCounter)

    @property
    def value(self) -> int:
        return self.incs.value - self.decs.value

    def inc(self, r: ReplicaId, n: int = 1) -> PNCounter:
        return PNCounter(self.incs.inc(r, n), self.decs)

    def dec(self, r: ReplicaId, n: int = 1) -> PNCounter:
        return PNCounter(self.incs, self.decs.inc(r, n))

    def inc_delta(self, r: ReplicaId, n: int = 1) -> PNCounter:
        return PNCounter(self.incs.inc_delta(r, n), GCounter())

    def dec_delta(self, r: ReplicaId, n: int = 1) -> PNCounter:
        return PNCounter(GCounter(), self.decs.inc_delta(r, n))

    def merge(self, other: PNCounter) -> PNCounter:
        return PNCounter(self.incs.merge(other.incs), self.decs.merge(other.decs))

    def leq(self, other: PNCounter) -> bool:
        return self.incs.leq(other.incs) and self.decs.leq(other.decs)

    def query(self) -> int:
        return self.value

    def to_wire(self):
        return (self.incs.to_wire(), self.decs.to_wire())

    @classmethod
    def from_wire(cls, w):
        return cls(GCounter.from_wire(w[0]), GCounter.from_wire(w[1]))


@register
@dataclass(frozen=True)
class LWWRegister:
    TAG: ClassVar[str] = "lwwreg"
    ts: Optional[HybridTimestamp] = None
    value: Any = None

    def write(self, v, ts: HybridTimestamp) -> LWWRegister:
        if self.ts is None or ts > self.ts:
            return LWWRegister(ts, v)
        return self

    def read(self) -> frozenset:
        return frozenset() if self.ts is None else frozenset([self.value])

    def merge(self, other: LWWRegister) -> LWWRegister:
        if other.ts is None:
            return self
        if self.ts is None or other.ts > self.ts:
            return other
        return self

    def leq(self, other: LWWRegister) -> bool:
        if self.ts is None:
            return True
        if other.ts is None:
            return False
        return self.ts <= other.ts

    def query(self) -> frozenset:
        return self.read()

    def to_wire(self):
        return (ts_wire(self.ts), self.value)

    @classmethod
    def from_wire(cls, w):
        return cls(ts_unwire(w[0]), w[1])


def _entry_dot_first(x) -> Dot:
    return x[0]


def _entry_dot_second(x) -> Dot:
    return x[1]


@register
@dataclass(frozen=True)
class MVRegister:
    """Multi-value register; ``entries`` holds ``(dot, value)`` pairs."""

    TAG: ClassVar[str] = "mvreg"
    entries: frozenset = frozenset()
    context: DotContext = field(default_factory=DotContext)

    def write(self, v, d: Dot) -> MVRegister:
        return self.merge(self.write_delta(v, d))

    def write_delta(self, v, d: Dot) -> MVRegister:
        covered = DotContext.of_dots([x[0] for x in self.entries] + [d])
        return MVRegister(frozenset([(d, v)]), covered)

    def read(self) -> tuple:
        return tuple(canon_sorted(v for _, v in self.entries))

    def merge(self, other: MVRegister) -> MVRegister:
        return MVRegister(*causal_join(self.entries, self.context, other.entries, other.context,
                                       _entry_dot_first))

    def leq(self, other: MVRegister) -> bool:
        return causal_leq(self.entries, self.context, other.entries, other.context, _entry_dot_first)

    def query(self) -> tuple:
        return self.read()

    def to_wire(self):
        return (frozenset((dot_wire(d), v) for d, v in self.entries), ctx_wire(self.context))

    @classmethod
    def from_wire(cls, w):
        return cls(frozenset((dot_unwire(d), v) for d, v in w[0]), ctx_unwire(w[1]))


@register
@dataclass(frozen=True)
class AWSet:
    """Add-wins (observed-remove) set; ``entries`` holds ``(element, dot)`` pairs."""

    TAG: ClassVar[str] = "awset"
    entries: frozenset = frozenset()
    context: DotContext = field(default_factory=DotContext)

    def add(self, e, d: Dot) -> AWSet:
        return self.merge(self.add_delta(e, d))

    def rmv(self, e) -> AWSet:
        return self.merge(self.rmv_delta(e))

    def add_delta(self, e, d: Dot) -> AWSet:
        return AWSet(frozenset([(e, d)]), DotContext.of_dots([d]))

    def rmv_delta(self, e) -> AWSet:
        # absent entries + covering context = removal under causal_join
        return AWSet(frozenset(), DotContext.of_dots(d for x, d in self.entries if x == e))

    def elements(self) -> frozenset:
        return frozenset(x for x, _ in self.entries)

    def contains(self, e) -> bool:
        return any(x == e for x, _ in self.entries)

    def merge(self, other: AWSet) -> AWSet:
        return AWSet(*causal_join(self.entries, self.context, other.entries, other.context,
                                  _entry_dot_second))

    def leq(self, other: AWSet) -> bool:
        return causal_leq(self.entries, self.context, other.entries, other.context, _entry_dot_second)

    def query(self) -> frozenset:
        return self.elements()

    def to_wire(self):
        return (frozenset((e, dot_wire(d)) for e, d in self.entries), ctx_wire(self.context))

    @classmethod
    def from_wire(cls, w):
        return cls(frozenset((e, dot_unwire(d)) for e, d in w[0]), ctx_unwire(w[1]))


def _tag_dot(x) -> Dot:
    return x[2]


@register
@dataclass(frozen=True)
class RWSet:
    """Remove-wins set.

    ``entries`` holds tags ``(element, "add", dot, ctx)`` and
    ``(element, "rmv", dot, None)``, where ``ctx`` is the causal context the
    add was issued under. Per element only the causally maximal adds and
    removes survive; the element is present iff some surviving add had
    seen every surviving remove.
    """

    TAG: ClassVar[str] = "rwset"
    entries: frozenset = frozenset()
    context: DotContext = field(default_factory=DotContext)

    def add(self, e, d: Dot) -> RWSet:
        return self.merge(self.add_delta(e, d))

    def rmv(self, e, d: Dot) -> RWSet:
        return self.merge(self.rmv_delta(e, d))

    def add_delta(self, e, d: Dot) -> RWSet:
        older = [t[2] for t in self.entries if t[0] == e and t[1] == "add"]
        return RWSet(frozenset([(e, "add", d, self.context)]), DotContext.of_dots(older + [d]))

    def rmv_delta(self, e, d: Dot) -> RWSet:
        # a remove retires every visible tag of e: adds it saw can no longer win
        older = [t[2] for t in self.entries if t[0] == e]
        return RWSet(frozenset([(e, "rmv", d, None)]), DotContext.of_dots(older + [d]))

    def elements(self) -> frozenset:
        adds: dict = {}
        rmvs: dict = {}
        for e, kind, d, ctx in self.entries:
            (adds if kind == "add" else rmvs).setdefault(canon_key(e), []).append((e, d, ctx))
        out = set()
        for key, tags in adds.items():
            removes = rmvs.get(key, [])
            if any(all(ctx.seen(rd) for _, rd, _ in removes) for _, _, ctx in tags):
                out.add(tags[0][0])
        return frozenset(out)

    def merge(self, other: RWSet) -> RWSet:
        return RWSet(*causal_join(self.entries, self.context, other.entries, other.context, _tag_dot))

    def leq(self, other: RWSet) -> bool:
        return causal_leq(self.entries, self.context, other.entries, other.context, _tag_dot)

    def query(self) -> frozenset:
        return self.elements()

    def to_wire(self):
        # contexts are not hashable on the wire, so tags go out as a sorted sequence
        ordered = sorted(self.entries, key=lambda t: (canon_key(t[0]), t[1], t[2]))
        tags = tuple((e, kind, dot_wire(d), None if ctx is None else ctx_wire(ctx))
                     for e, kind, d, ctx in ordered)
        return (tags, ctx_wire(self.context))

    @classmethod
    def from_wire(cls, w):
        tags = frozenset(
            (e, kind, dot_unwire(d), None if ctx is None else ctx_unwire(ctx))
            for e, kind, d, ctx in w[0]
        )
        return cls(tags, ctx_unwire(w[1]))


@register
@dataclass(frozen=True)
class LWWSet:
    """Last-writer-wins set: per element the greatest-timestamp record wins."""

    TAG: ClassVar[str] = "lwwset"
    records: frozenset = frozenset()  # (element, ts, present), at most one per element

    def _lookup(self) -> dict:
        return {canon_key(e): (e, ts, p) for e, ts, p in self.records}

    def _put(self, e, ts: HybridTimestamp, present: bool) -> LWWSet:
        table = self._lookup()
        cur = table.get(canon_key(e))
        if cur is not None and not ts > cur[1]:
            return self
        table[canon_key(e)] = (e, ts, present)
        return LWWSet(frozenset(table.values()))

    def add(self, e, ts: HybridTimestamp) -> LWWSet:
        return self._put(e, ts, True)

    def rmv(self, e, ts: HybridTimestamp) -> LWWSet:
        return self._put(e, ts, False)

    def elements(self) -> frozenset:
        return frozenset(e for e, _, p in self.records if p)

    def merge(self, other: LWWSet) -> LWWSet:
        out = self
        for e, ts, p in other.records:
            out = out._put(e, ts, p)
        return out

    def leq(self, other: LWWSet) -> bool:
        theirs = other._lookup()
        for key, (_, ts, _) in self._lookup().items():
            if key not in theirs or ts > theirs[key][1]:
                return False
        return True

    def query(self) -> frozenset:
        return self.elements()

    def to_wire(self):
        return frozenset((e, ts_wire(ts), p) for e, ts, p in self.records)

    @classmethod
    def from_wire(cls, w):
        return cls(frozenset((e, ts_unwire(ts), p) for e, ts, p in w))


STATE_TYPES = (GCounter, PNCounter, LWWRegister, MVRegister, AWSet, RWSet, LWWSet)
