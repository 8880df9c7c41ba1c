"""Lossy, duplicating, reordering message substrate.

Every message's fate (drop, duplicate, per-copy delay) is drawn from a
generator keyed by the run seed and the message's logical coordinates
``(tick, src, dst, channel, n)``, not from a shared stream. The same send
therefore meets the same fate no matter what other traffic the run
produced, which is what lets delta- and state-mode runs of one script see
identical deliveries.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Any

from crdtkit.simulator.rng import XorShift64Star


@dataclass(frozen=True)
class NetConfig:
    drop: float = 0.0
    dup: float = 0.0
    reorder: int = 0

    def __post_init__(self):
        if not (0.0 <= self.drop <= 1.0 and 0.0 <= self.dup <= 1.0):
            raise ValueError("rates must lie in [0, 1]")
        if self.reorder < 0:
            raise ValueError("reorder window must be non-negative")


@dataclass
class Message:
    id: int
    src: str
    dst: str
    channel: str  # "data" | "ack"
    kind: str
    payload: Any
    nbytes: int


@dataclass
class NetStats:
    sent: int = 0
    dropped: int = 0
    duplicated: int = 0
    delivered: int = 0
    bytes_sent: int = 0


class Network:
    def __init__(self, seed: int, trace):
        self.seed = seed
        self.trace = trace
        self.config = NetConfig()
        self.stats = NetStats()
        self._queue: list = []
        self._next_id = 0
        self._order = 0
        self._slots: dict = {}

    def send(self, tick: int, src: str, dst: str, channel: str, kind: str, payload, nbytes: int,
             note: str = "") -> Message:
        self._next_id += 1
        msg = Message(self._next_id, src, dst, channel, kind, payload, nbytes)
        slot = (tick, src, dst, channel)
        n = self._slots.get(slot, 0)
        self._slots[slot] = n + 1
        rng = XorShift64Star.keyed(self.seed, tick, src, dst, channel, n)
        drop_draw, dup_draw = rng.random(), rng.random()
        delays = (rng.randint(0, self.config.reorder), rng.randint(0, self.config.reorder))
        self.stats.sent += 1
        self.stats.bytes_sent += nbytes
        fields = [src, dst, f"m{msg.id}", kind, nbytes]
        if note:
            fields.append(note)
        self.trace.emit(tick, "message-sent", *fields)
        if drop_draw < self.config.drop:
            self.stats.dropped += 1
            self.trace.emit(tick, "message-dropped", src, dst, f"m{msg.id}")
            return msg
        copies = 2 if dup_draw < self.config.dup else 1
        if copies == 2:
            self.stats.duplicated += 1
        for c in range(copies):
            self._order += 1
            heapq.heappush(self._queue, (tick + delays[c], self._order, msg))
        return msg

    def pop_due(self, tick: int):
        """Next message due at or before ``tick``, in (due, send order); None if none."""
        if self._queue and self._queue[0][0] <= tick:
            _, _, msg = heapq.heappop(self._queue)
            self.stats.delivered += 1
            return msg
        return None

    def in_flight(self) -> int:
        return len(self._queue)
