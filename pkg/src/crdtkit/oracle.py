"""Executable concurrency semantics over explicit operation histories.

A :class:`History` is a set of update events plus an explicit happens-before
relation. The ``eval_*`` functions compute the state each replicated type
must expose once every replica has seen every event in the history; they are
the reference the concrete implementations are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Optional

import numpy as np

from crdtkit import kernels
from crdtkit.causality import Dot, HybridTimestamp, ReplicaId
from crdtkit.codec import canon_key, canon_sorted

KINDS = ("add", "rmv", "wr", "inc", "dec")
INIT_REPLICA = "_init"


class InvalidHistory(ValueError):
    def __init__(self, violation: "Violation | str"):
        super().__init__(str(violation))
        self.violation = violation


class UnknownEvent(KeyError):
    pass


@dataclass(frozen=True)
class OpEvent:
    """One update. ``arg`` is the element (add/rmv), value (wr) or amount (inc/dec)."""

    id: Dot
    kind: str
    arg: Any = None
    ts: Optional[HybridTimestamp] = None
    score: Any = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")

    @property
    def amount(self) -> int:
        return 1 if self.arg is None else self.arg

    def __str__(self) -> str:
        arg = "" if self.arg is None else repr(self.arg)
        return f"{self.kind}({arg})@{self.id}"


@dataclass(frozen=True)
class Violation:
    kind: str  # cycle-detected | per-replica-order-broken | timestamp-order-broken | ...
    witness: tuple

    def __str__(self) -> str:
        return f"{self.kind}: " + ", ".join(str(w) for w in self.witness)


@dataclass(frozen=True)
class History:
    events: tuple[OpEvent, ...] = ()
    hb: frozenset[tuple[Dot, Dot]] = field(default_factory=frozenset)

    @cached_property
    def index(self) -> dict[Dot, int]:
        return {e.id: i for i, e in enumerate(self.events)}

    @cached_property
    def by_id(self) -> dict[Dot, OpEvent]:
        return {e.id: e for e in self.events}

    @cached_property
    def reach(self) -> np.ndarray:
        """Transitive closure of ``hb`` as a boolean matrix over ``events``."""
        n = len(self.events)
        adj = np.zeros((n, n), dtype=np.bool_)
        idx = self.index
        for a, b in self.hb:
            if a in idx and b in idx:
                adj[idx[a], idx[b]] = True
        return kernels.transitive_closure(adj)

    def precedes(self, a: Dot, b: Dot) -> bool:
        try:
            return bool(self.reach[self.index[a], self.index[b]])
        except KeyError as exc:
            raise UnknownEvent(exc.args[0]) from None

    def replicas(self) -> list[ReplicaId]:
        return sorted({e.id.replica for e in self.events})


def history_validate(h: History) -> Optional[Violation]:
    """None when ``h`` is well formed, else the first violated invariant."""
    seen: dict[Dot, OpEvent] = {}
    for e in h.events:
        if e.id in seen:
            return Violation("duplicate-event-id", (e.id,))
        seen[e.id] = e
    for a, b in sorted(h.hb):
        if a not in seen or b not in seen:
            return Violation("unknown-event", (a, b))
    reach = h.reach
    idx = h.index
    diag = np.flatnonzero(np.diagonal(reach))
    if diag.size:
        a = h.events[int(diag[0])].id
        partner = next(
            (b for b in sorted(seen) if b != a and reach[idx[a], idx[b]] and reach[idx[b], idx[a]]),
            a,
        )
        return Violation("cycle-detected", (a, partner))
    per_replica: dict[ReplicaId, list[Dot]] = {}
    for d in sorted(seen):
        per_replica.setdefault(d.replica, []).append(d)
    for dots in per_replica.values():
        for a, b in zip(dots, dots[1:]):
            if not reach[idx[a], idx[b]]:
                return Violation("per-replica-order-broken", (a, b))
    stamped = [e for e in h.events if e.ts is not None]
    if len({e.ts for e in stamped}) != len(stamped):
        dup = sorted(stamped, key=lambda e: e.ts)
        for x, y in zip(dup, dup[1:]):
            if x.ts == y.ts:
                return Violation("timestamp-order-broken", (x.id, y.id))
    ii, jj = np.nonzero(reach)
    for i, j in zip(ii.tolist(), jj.tolist()):
        ti, tj = h.events[i].ts, h.events[j].ts
        if ti is not None and tj is not None and not ti < tj:
            return Violation("timestamp-order-broken", (h.events[i].id, h.events[j].id))
    return None


def _checked(h: History, kinds: Iterable[str]) -> History:
    allowed = set(kinds)
    for e in h.events:
        if e.kind not in allowed:
            raise InvalidHistory(f"event {e} outside domain {sorted(allowed)}")
    v = history_validate(h)
    if v is not None:
        raise InvalidHistory(v)
    return h


def concurrent(h: History, a: Dot, b: Dot) -> bool:
    if a not in h.index:
        raise UnknownEvent(a)
    if b not in h.index:
        raise UnknownEvent(b)
    if a == b:
        raise ValueError("an event is not concurrent with itself")
    return not h.precedes(a, b) and not h.precedes(b, a)


def _split(h: History, first: str, second: str):
    """Index arrays and integer element keys for two event kinds."""
    codes: dict[Any, int] = {}
    src, src_key, dst, dst_key = [], [], [], []
    for i, e in enumerate(h.events):
        code = codes.setdefault(canon_key(e.arg), len(codes))
        if e.kind == first:
            src.append(i)
            src_key.append(code)
        elif e.kind == second:
            dst.append(i)
            dst_key.append(code)
    return (np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
            np.array(src_key, dtype=np.int64), np.array(dst_key, dtype=np.int64))


def eval_aw_set(h: History) -> frozenset:
    _checked(h, ("add", "rmv"))
    src, dst, sk, dk = _split(h, "add", "rmv")
    removed = kernels.followed_by_same_key(h.reach, src, dst, sk, dk)
    return frozenset(h.events[i].arg for i, gone in zip(src.tolist(), removed.tolist()) if not gone)


def eval_rw_set(h: History) -> frozenset:
    """An element is present iff one of its adds follows every remove of it."""
    _checked(h, ("add", "rmv"))
    src, dst, sk, dk = _split(h, "add", "rmv")
    wins = kernels.preceded_by_all_same_key(h.reach, src, dst, sk, dk)
    return frozenset(h.events[i].arg for i, ok in zip(src.tolist(), wins.tolist()) if ok)


def eval_lww_set(h: History) -> frozenset:
    _checked(h, ("add", "rmv"))
    latest: dict[Any, OpEvent] = {}
    for e in h.events:
        k = canon_key(e.arg)
        if k not in latest or latest[k].ts < e.ts:
            latest[k] = e
    return frozenset(e.arg for e in latest.values() if e.kind == "add")


def eval_mv_register(h: History) -> tuple:
    """Values of hb-maximal writes, as a canonically sorted multiset (tuple)."""
    _checked(h, ("wr",))
    n = len(h.events)
    src = np.arange(n, dtype=np.int64)
    zeros = np.zeros(n, dtype=np.int64)
    overwritten = kernels.followed_by_same_key(h.reach, src, src, zeros, zeros)
    return tuple(canon_sorted(e.arg for e, o in zip(h.events, overwritten.tolist()) if not o))


def eval_lww_register(h: History) -> frozenset:
    _checked(h, ("wr",))
    if not h.events:
        return frozenset()
    last = max(h.events, key=lambda e: e.ts)
    return frozenset([last.arg])


def eval_counter(h: History) -> int:
    _checked(h, ("inc", "dec"))
    return sum(e.amount if e.kind == "inc" else -e.amount for e in h.events)


def eval_ww_counter(h: History) -> int:
    _checked(h, ("inc", "dec", "wr"))
    writes = [e for e in h.events if e.kind == "wr"]
    if not writes:
        return sum(e.amount if e.kind == "inc" else -e.amount for e in h.events if e.kind != "wr")
    last = max(writes, key=lambda e: e.ts)
    row = h.reach[h.index[last.id]]
    o = 0
    for i, e in enumerate(h.events):
        if e.kind != "wr" and row[i]:
            o += e.amount if e.kind == "inc" else -e.amount
    return last.arg + o


def topk_rank(score, element, dot: Dot):
    return (score, canon_key(element), dot)


def eval_topk(h: History, k: int) -> tuple:
    """Top-``k`` elements of a fully replicated observed-remove set of scored adds.

    Each element is ranked by its best live add (score, element, dot);
    the result lists elements best first.
    """
    _checked(h, ("add", "rmv"))
    src, dst, sk, dk = _split(h, "add", "rmv")
    removed = kernels.followed_by_same_key(h.reach, src, dst, sk, dk)
    best: dict[Any, tuple] = {}
    for i, gone in zip(src.tolist(), removed.tolist()):
        if gone:
            continue
        e = h.events[i]
        rank = topk_rank(e.score, e.arg, e.id)
        key = canon_key(e.arg)
        if key not in best or best[key][0] < rank:
            best[key] = (rank, e.arg)
    ranked = sorted(best.values(), key=lambda p: p[0], reverse=True)
    return tuple(arg for _, arg in ranked[:k])


class HistoryBuilder:
    """Incremental construction of test histories.

    Program order per replica is added automatically. Timestamps default to
    ``(creation index, 0, replica)``, a linear extension of hb, unless given.
    Events created with :meth:`init` precede every later event.
    """

    def __init__(self):
        self._events: list[OpEvent] = []
        self._hb: set[tuple[Dot, Dot]] = set()
        self._last: dict[ReplicaId, Dot] = {}
        self._init: list[Dot] = []

    def init(self, kind: str, arg=None, score=None) -> Dot:
        d = self.event(INIT_REPLICA, kind, arg, score=score)
        self._init.append(d)
        return d

    def event(self, replica: ReplicaId, kind: str, arg=None, *, after: Iterable[Dot] = (),
              ts: Optional[HybridTimestamp] = None, score=None) -> Dot:
        prev = self._last.get(replica)
        d = Dot(replica, prev.counter + 1 if prev else 1)
        if ts is None:
            ts = HybridTimestamp(len(self._events) + 1, 0, replica)
        self._events.append(OpEvent(d, kind, arg, ts, score))
        if prev is not None:
            self._hb.add((prev, d))
        if replica != INIT_REPLICA and self._init:
            self._hb.add((self._init[-1], d))
        for a in after:
            self._hb.add((a, d))
        self._last[replica] = d
        return d

    def edge(self, a: Dot, b: Dot) -> None:
        self._hb.add((a, b))

    def build(self) -> History:
        return History(tuple(self._events), frozenset(self._hb))
