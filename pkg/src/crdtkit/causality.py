"""Event identity, version vectors, dot contexts and hybrid logical clocks."""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, NamedTuple

ReplicaId = str


class Dot(NamedTuple):
    """Unique event identifier: the ``counter``-th event generated at ``replica``."""

    replica: ReplicaId
    counter: int

    def __str__(self) -> str:
        return f"{self.replica}:{self.counter}"


class HybridTimestamp(NamedTuple):
    """Totally ordered timestamp; tuple order is (physical, logical, replica)."""

    physical: int
    logical: int
    replica: ReplicaId

    def __str__(self) -> str:
        return f"({self.physical},{self.logical},{self.replica})"


class VersionVector(Mapping[ReplicaId, int]):
    """Immutable map ReplicaId -> highest contiguous counter seen.

    Absent replicas read as 0 and zero entries are never stored, so equal
    vectors compare and hash equal regardless of how they were built.
    """

    __slots__ = ("_entries", "_hash")

    def __init__(self, entries: Mapping[ReplicaId, int] | Iterable[tuple[ReplicaId, int]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        clean = {}
        for r, n in items:
            if n < 0:
                raise ValueError(f"negative version vector entry {r}={n}")
            if n:
                clean[r] = n
        self._entries = clean
        self._hash = None

    def __getitem__(self, r: ReplicaId) -> int:
        return self._entries.get(r, 0)

    def get(self, r, default=0):
        return self._entries.get(r, default)

    def __contains__(self, r) -> bool:
        return r in self._entries

    def __iter__(self) -> Iterator[ReplicaId]:
        return iter(sorted(self._entries))

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, VersionVector):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ",".join(f"{r}:{self._entries[r]}" for r in sorted(self._entries))
        return "{" + body + "}"

    def with_entry(self, r: ReplicaId, n: int) -> VersionVector:
        entries = dict(self._entries)
        entries[r] = n
        return VersionVector(entries)

    def join(self, other: VersionVector) -> VersionVector:
        return vv_join(self, other)

    def __le__(self, other: VersionVector) -> bool:
        return vv_leq(self, other)


def next_dot(vv: Mapping[ReplicaId, int], r: ReplicaId) -> Dot:
    return Dot(r, vv.get(r, 0) + 1)


def vv_join(a: Mapping[ReplicaId, int], b: Mapping[ReplicaId, int]) -> VersionVector:
    merged = dict(a.items())
    for r, n in b.items():
        if n > merged.get(r, 0):
            merged[r] = n
    return VersionVector(merged)


def vv_leq(a: Mapping[ReplicaId, int], b: Mapping[ReplicaId, int]) -> bool:
    return all(n <= b.get(r, 0) for r, n in a.items())


def dot_seen(vv: Mapping[ReplicaId, int], d: Dot) -> bool:
    return d.counter <= vv.get(d.replica, 0)


class DotContext:
    """Causal context: a contiguous version vector plus a cloud of extra dots.

    States built by causally ordered synchronization keep an empty cloud;
    deltas (which name individual dots, e.g. ``{B:3}`` without ``B:1..2``)
    need the cloud. The cloud is compacted into the vector on construction.
    """

    __slots__ = ("vv", "cloud", "_hash")

    def __init__(self, vv: VersionVector | Mapping[ReplicaId, int] = VersionVector(), cloud: Iterable[Dot] = ()):
        entries = dict(vv.items())
        pending = set()
        for d in cloud:
            if d.counter > entries.get(d.replica, 0):
                pending.add(d)
        # fold dots that extend the contiguous prefix
        for d in sorted(pending):
            if d.counter == entries.get(d.replica, 0) + 1:
                entries[d.replica] = d.counter
        self.vv = VersionVector(entries)
        self.cloud = frozenset(d for d in pending if d.counter > entries.get(d.replica, 0))
        self._hash = None

    @classmethod
    def of_dots(cls, dots: Iterable[Dot]) -> DotContext:
        return cls(VersionVector(), dots)

    def seen(self, d: Dot) -> bool:
        return d.counter <= self.vv.get(d.replica, 0) or d in self.cloud

    def add(self, d: Dot) -> DotContext:
        return DotContext(self.vv, self.cloud | {d})

    def join(self, other: DotContext) -> DotContext:
        return DotContext(vv_join(self.vv, other.vv), self.cloud | other.cloud)

    def leq(self, other: DotContext) -> bool:
        if vv_leq(self.vv, other.vv) and not self.cloud:
            return True
        return all(other.seen(d) for d in self.dots())

    def dots(self) -> list[Dot]:
        out = [Dot(r, c) for r, n in self.vv.items() for c in range(1, n + 1)]
        out.extend(self.cloud)
        return sorted(out)

    def __eq__(self, other) -> bool:
        if isinstance(other, DotContext):
            return self.vv == other.vv and self.cloud == other.cloud
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.vv, self.cloud))
        return self._hash

    def __repr__(self) -> str:
        if not self.cloud:
            return repr(self.vv)
        return f"{self.vv!r}+{{{','.join(str(d) for d in sorted(self.cloud))}}}"


def ts_compare(a: HybridTimestamp, b: HybridTimestamp) -> int:
    """-1, 0 or 1. Only identical timestamps compare equal."""
    ka = (a.physical, a.logical, a.replica)
    kb = (b.physical, b.logical, b.replica)
    return (ka > kb) - (ka < kb)


def hlc_local(clock: HybridTimestamp, now: int) -> HybridTimestamp:
    if now > clock.physical:
        return HybridTimestamp(now, 0, clock.replica)
    return HybridTimestamp(clock.physical, clock.logical + 1, clock.replica)


def hlc_receive(clock: HybridTimestamp, msg: HybridTimestamp, now: int) -> HybridTimestamp:
    physical = max(clock.physical, msg.physical, now)
    if physical == clock.physical == msg.physical:
        logical = max(clock.logical, msg.logical) + 1
    elif physical == clock.physical:
        logical = clock.logical + 1
    elif physical == msg.physical:
        logical = msg.logical + 1
    else:
        logical = 0
    return HybridTimestamp(physical, logical, clock.replica)


def hlc_zero(r: ReplicaId) -> HybridTimestamp:
    return HybridTimestamp(0, 0, r)
