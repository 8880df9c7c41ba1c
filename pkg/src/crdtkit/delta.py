"""Delta-state replication with interval-based anti-entropy.

Updates produce small lattice elements (deltas). Each replica logs the deltas
it produced or received in a :class:`DeltaBuffer` indexed by a local
sequence number; a peer that acknowledged index ``a`` is later sent the join
of the logged deltas above ``a``. A peer with no acknowledgement yet, or whose
interval was already garbage collected, is sent the full state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from crdtkit import codec
from crdtkit.causality import ReplicaId, next_dot
from crdtkit.state_crdts import AWSet, GCounter, MVRegister, PNCounter, decode_state, encode_state

DELTA_TYPES = (GCounter, PNCounter, AWSet, MVRegister)


class UnsupportedType(TypeError):
    pass


def delta_update(state, op: tuple):
    """Apply ``op = (name, replica, *args)``; return ``(new_state, delta)``."""
    name, r, *args = op
    if isinstance(state, GCounter):
        if name != "inc":
            raise ValueError(f"GCounter has no {name!r}")
        d = state.inc_delta(r, *args)
    elif isinstance(state, PNCounter):
        if name == "inc":
            d = state.inc_delta(r, *args)
        elif name == "dec":
            d = state.dec_delta(r, *args)
        else:
            raise ValueError(f"PNCounter has no {name!r}")
    elif isinstance(state, AWSet):
        if name == "add":
            d = state.add_delta(args[0], next_dot(state.context.vv, r))
        elif name == "rmv":
            d = state.rmv_delta(args[0])
        else:
            raise ValueError(f"AWSet has no {name!r}")
    elif isinstance(state, MVRegister):
        if name != "wr":
            raise ValueError(f"MVRegister has no {name!r}")
        d = state.write_delta(args[0], next_dot(state.context.vv, r))
    else:
        raise UnsupportedType(f"{type(state).__name__} is not supported in delta mode")
    return state.merge(d), d


@dataclass(frozen=True)
class FullState:
    state: object
    index: int


@dataclass(frozen=True)
class DeltaInterval:
    from_index: int  # exclusive: the receiver's last acknowledged index
    to_index: int
    delta: object


@dataclass(frozen=True)
class Ack:
    index: int


DeltaMessage = Union[FullState, DeltaInterval, Ack]


def encode_message(msg: DeltaMessage) -> bytes:
    if isinstance(msg, FullState):
        return codec.encode(("full", msg.index, encode_state(msg.state)))
    if isinstance(msg, DeltaInterval):
        return codec.encode(("delta", msg.from_index, msg.to_index, encode_state(msg.delta)))
    if isinstance(msg, Ack):
        return codec.encode(("ack", msg.index))
    raise TypeError(type(msg).__name__)


def decode_message(buf: bytes) -> DeltaMessage:
    tag, *rest = codec.decode(buf)
    if tag == "full":
        return FullState(decode_state(rest[1]), rest[0])
    if tag == "delta":
        return DeltaInterval(rest[0], rest[1], decode_state(rest[2]))
    if tag == "ack":
        return Ack(rest[0])
    raise codec.DecodeError(f"unknown delta message {tag!r}")


@dataclass
class DeltaBuffer:
    pending: list = field(default_factory=list)  # [(index, delta)], ascending
    acked: dict = field(default_factory=dict)  # peer -> highest index acknowledged
    counter: int = 0

    def append(self, delta) -> int:
        self.counter += 1
        self.pending.append((self.counter, delta))
        return self.counter

    def interval(self, after: int):
        """Join of the deltas with index > ``after``; None if any were discarded."""
        if after >= self.counter:
            return None, self.counter
        if not self.pending or self.pending[0][0] > after + 1:
            raise LookupError(after)
        joined = None
        for idx, d in self.pending:
            if idx > after:
                joined = d if joined is None else joined.merge(d)
        return joined, self.counter

    def collect(self, peers) -> None:
        """Drop entries every peer has acknowledged."""
        if not peers:
            return
        floor = min(self.acked.get(p, 0) for p in peers)
        self.pending = [(i, d) for i, d in self.pending if i > floor]


class DeltaReplica:
    def __init__(self, rid: ReplicaId, state, peers=()):
        if not isinstance(state, DELTA_TYPES):
            raise UnsupportedType(f"{type(state).__name__} is not supported in delta mode")
        self.rid = rid
        self.state = state
        self.peers = sorted(p for p in peers if p != rid)
        self.buffer = DeltaBuffer()

    def update(self, op: tuple):
        self.state, d = delta_update(self.state, op)
        self.buffer.append(d)
        return d

    def prepare(self, peer: ReplicaId) -> Optional[DeltaMessage]:
        """Message for ``peer``, or None when it already has everything."""
        acked = self.buffer.acked.get(peer)
        if acked is None:
            return FullState(self.state, self.buffer.counter)
        try:
            joined, upto = self.buffer.interval(acked)
        except LookupError:
            return FullState(self.state, self.buffer.counter)
        if joined is None:
            return None
        return DeltaInterval(acked, upto, joined)

    def receive(self, msg: DeltaMessage) -> Optional[Ack]:
        if isinstance(msg, Ack):
            raise TypeError("acks go to on_ack")
        incoming = msg.state if isinstance(msg, FullState) else msg.delta
        index = msg.index if isinstance(msg, FullState) else msg.to_index
        if not incoming.leq(self.state):
            self.state = self.state.merge(incoming)
            # relayed onward so peers learn everything this replica knows
            self.buffer.append(incoming)
        return Ack(index)

    def on_ack(self, peer: ReplicaId, ack: Ack) -> None:
        if ack.index > self.buffer.acked.get(peer, -1):
            self.buffer.acked[peer] = ack.index
        self.buffer.collect(self.peers)


def anti_entropy_step(sender: DeltaReplica, receiver: DeltaReplica) -> Optional[DeltaMessage]:
    """One lossless sender -> receiver round; returns the message that was sent."""
    msg = sender.prepare(receiver.rid)
    if msg is not None:
        ack = receiver.receive(msg)
        sender.on_ack(receiver.rid, ack)
    return msg
