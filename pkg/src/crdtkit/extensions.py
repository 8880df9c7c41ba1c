"""Bounded counter (escrow of decrement rights) and a non-uniform top-K set."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Mapping, Optional

from crdtkit.causality import Dot, ReplicaId, VersionVector, dot_seen, vv_join, vv_leq
from crdtkit.codec import canon_key
from crdtkit.state_crdts import dot_unwire, dot_wire, register, vv_wire


class InsufficientRights(Exception):
    """Raised when a replica lacks the rights for a decrement or transfer.

    The caller decides whether to fail the operation or obtain rights from
    another replica first.
    """

    def __init__(self, replica: ReplicaId, needed: int, available: int):
        super().__init__(f"replica {replica} needs {needed} rights, has {available}")
        self.replica = replica
        self.needed = needed
        self.available = available


class AllocationMismatch(ValueError):
    pass


def _freeze(d: Mapping) -> frozenset:
    return frozenset((k, v) for k, v in d.items() if v)


@register
@dataclass(frozen=True)
class BoundedCounter:
    """Counter that never goes negative.

    ``rights`` maps ``(i, j)`` to the rights ``i`` transferred to ``j``; the
    diagonal ``(i, i)`` holds ``i``'s initial allocation plus its increments.
    ``used`` counts decrements per replica. Each entry is only written by its
    owner (row ``i`` by replica ``i``), so entrywise max is a join.
    """

    TAG: ClassVar[str] = "bcounter"
    rights: frozenset = frozenset()  # ((i, j), n)
    used: VersionVector = field(default_factory=VersionVector)

    @property
    def _table(self) -> dict:
        return dict(self.rights)

    @property
    def value(self) -> int:
        return sum(n for (i, j), n in self.rights if i == j) - sum(self.used.values())

    def local_rights(self, r: ReplicaId) -> int:
        total = 0
        for (i, j), n in self.rights:
            if i == j == r:
                total += n
            elif j == r:
                total += n
            elif i == r:
                total -= n
        return total - self.used[r]

    def _bump(self, key, n) -> frozenset:
        table = self._table
        table[key] = table.get(key, 0) + n
        return _freeze(table)

    def inc(self, r: ReplicaId, n: int = 1) -> BoundedCounter:
        if n < 1:
            raise ValueError("increment must be positive")
        return BoundedCounter(self._bump((r, r), n), self.used)

    def dec(self, r: ReplicaId, n: int = 1) -> BoundedCounter:
        if n < 1:
            raise ValueError("decrement must be positive")
        have = self.local_rights(r)
        if have < n:
            raise InsufficientRights(r, n, have)
        return BoundedCounter(self.rights, self.used.with_entry(r, self.used[r] + n))

    def transfer(self, src: ReplicaId, dst: ReplicaId, n: int) -> BoundedCounter:
        if n < 0:
            raise ValueError("transfer amount must be non-negative")
        if n == 0 or src == dst:
            return self
        have = self.local_rights(src)
        if have < n:
            raise InsufficientRights(src, n, have)
        return BoundedCounter(self._bump((src, dst), n), self.used)

    def merge(self, other: BoundedCounter) -> BoundedCounter:
        table = self._table
        for key, n in other.rights:
            if n > table.get(key, 0):
                table[key] = n
        return BoundedCounter(_freeze(table), vv_join(self.used, other.used))

    def leq(self, other: BoundedCounter) -> bool:
        theirs = other._table
        return all(n <= theirs.get(k, 0) for k, n in self.rights) and vv_leq(self.used, other.used)

    def query(self) -> int:
        return self.value

    def to_wire(self):
        return ({f"{i}\x00{j}": n for (i, j), n in self.rights}, vv_wire(self.used))

    @classmethod
    def from_wire(cls, w):
        rights = {tuple(k.split("\x00")): n for k, n in w[0].items()}
        return cls(_freeze(rights), VersionVector(w[1]))


def bc_new(initial: int, replicas, allocation: Mapping[ReplicaId, int]) -> BoundedCounter:
    if initial < 0:
        raise AllocationMismatch("initial value must be non-negative")
    unknown = set(allocation) - set(replicas)
    if unknown:
        raise AllocationMismatch(f"allocation names unknown replicas {sorted(unknown)}")
    if any(n < 0 for n in allocation.values()):
        raise AllocationMismatch("negative allocation")
    if sum(allocation.values()) != initial:
        raise AllocationMismatch(f"allocation sums to {sum(allocation.values())}, expected {initial}")
    return BoundedCounter(_freeze({(r, r): n for r, n in allocation.items()}), VersionVector())


def even_allocation(initial: int, replicas) -> dict:
    replicas = sorted(replicas)
    share, extra = divmod(initial, len(replicas))
    return {r: share + (1 if i < extra else 0) for i, r in enumerate(replicas)}


# -- top-K -------------------------------------------------------------------

Entry = tuple  # (element, score, dot)


def entry_rank(x: Entry):
    return (x[1], canon_key(x[0]), x[2])


@register
@dataclass(frozen=True)
class TopKSet:
    """Non-uniformly replicated top-K set with observed removes.

    A replica stores its own live adds (``local``) and the best ``k``
    entries it knows of (``top``). Only ``top``, the removals and the add
    context are ever shipped, so adds that never rank in a replica's top stay
    where they were made. ``removals`` maps an element to the add context
    the removing replica had: an add is dead iff its dot is covered there.
    """

    TAG: ClassVar[str] = "topk"
    k: int = 1
    local: frozenset = frozenset()
    top: frozenset = frozenset()
    removals: frozenset = frozenset()  # (element, VersionVector)
    ctx: VersionVector = field(default_factory=VersionVector)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")

    def _removal_table(self) -> dict:
        return {canon_key(e): (e, vv) for e, vv in self.removals}

    def is_live(self, x: Entry, table: Optional[dict] = None) -> bool:
        table = self._removal_table() if table is None else table
        hit = table.get(canon_key(x[0]))
        return hit is None or not dot_seen(hit[1], x[2])

    def _rebuild(self, local, candidates, removals, ctx) -> TopKSet:
        probe = TopKSet(self.k, frozenset(), frozenset(), removals, ctx)
        table = probe._removal_table()
        local = frozenset(x for x in local if probe.is_live(x, table))
        best: dict = {}
        for x in set(candidates) | local:
            if not probe.is_live(x, table):
                continue
            key = canon_key(x[0])
            if key not in best or entry_rank(best[key]) < entry_rank(x):
                best[key] = x
        top = sorted(best.values(), key=entry_rank, reverse=True)[: self.k]
        return TopKSet(self.k, local, frozenset(top), removals, ctx)

    def add(self, e, score, d: Dot) -> tuple[TopKSet, Optional[tuple]]:
        entry = (e, score, d)
        out = self._rebuild(self.local | {entry}, self.top, self.removals,
                            self.ctx.with_entry(d.replica, max(self.ctx[d.replica], d.counter)))
        return out, (("add-entry", entry) if entry in out.top else None)

    def rmv(self, e) -> tuple[TopKSet, tuple]:
        table = self._removal_table()
        prev = table.get(canon_key(e), (e, VersionVector()))[1]
        table[canon_key(e)] = (e, vv_join(prev, self.ctx))
        removals = frozenset(table.values())
        out = self._rebuild(self.local, self.top, removals, self.ctx)
        return out, ("removal", e, self.ctx)

    def read(self) -> tuple:
        return tuple(x[0] for x in sorted(self.top, key=entry_rank, reverse=True))

    def snapshot(self) -> TopKSet:
        """The shared part of the state: everything except non-top local adds."""
        return TopKSet(self.k, frozenset(), self.top, self.removals, self.ctx)

    def merge(self, other: TopKSet) -> TopKSet:
        table = self._removal_table()
        for e, vv in other.removals:
            key = canon_key(e)
            table[key] = (e, vv_join(table[key][1], vv)) if key in table else (e, vv)
        return self._rebuild(self.local, self.top | other.top | other.local,
                             frozenset(table.values()), vv_join(self.ctx, other.ctx))

    def apply_broadcast(self, msg: tuple) -> TopKSet:
        if msg[0] == "add-entry":
            entry = msg[1]
            d = entry[2]
            ctx = self.ctx.with_entry(d.replica, max(self.ctx[d.replica], d.counter))
            return self._rebuild(self.local, self.top | {entry}, self.removals, ctx)
        if msg[0] == "removal":
            _, e, vv = msg
            return self.merge(TopKSet(self.k, removals=frozenset([(e, vv)])))
        raise ValueError(f"unknown top-K message {msg[0]!r}")

    def query(self) -> tuple:
        return self.read()

    def to_wire(self):
        def ew(x):
            return (x[0], x[1], dot_wire(x[2]))
        return (self.k, frozenset(map(ew, self.local)), frozenset(map(ew, self.top)),
                tuple((e, vv_wire(vv)) for e, vv in sorted(self.removals, key=lambda r: canon_key(r[0]))),
                vv_wire(self.ctx))

    @classmethod
    def from_wire(cls, w):
        def eu(x):
            return (x[0], x[1], dot_unwire(x[2]))
        return cls(w[0], frozenset(map(eu, w[1])), frozenset(map(eu, w[2])),
                   frozenset((e, VersionVector(vv)) for e, vv in w[3]), VersionVector(w[4]))
