"""Per-type adapters: how the simulator drives, queries and judges each CRDT."""

from __future__ import annotations

from typing import Optional

from crdtkit import oracle
from crdtkit.causality import next_dot
from crdtkit.codec import canon_key, canon_sorted
from crdtkit.extensions import InsufficientRights, TopKSet, bc_new, even_allocation
from crdtkit.op_crdts import OpAWSet, OpCounter, OpWWCounter
from crdtkit.state_crdts import AWSet, GCounter, LWWRegister, LWWSet, MVRegister, PNCounter, RWSet

ELEMENTS = ("a", "b", "c", "d")


class Rejected(Exception):
    """The replica refused the update; it is not an event of the history."""


class TypeAdapter:
    tag = ""
    ops: dict = {}  # op name -> (min args, max args)
    models: tuple = ("state",)

    def initial(self, params: dict, replicas):
        raise NotImplementedError

    def init_events(self, params: dict) -> list:
        """Synthetic history events that precede the whole run."""
        return []

    def apply(self, state, rid, op, ts):
        """State-mode update -> new state."""
        raise NotImplementedError

    def event(self, op) -> Optional[tuple]:
        """(kind, arg, score) of the history event an update produces, or None."""
        raise NotImplementedError

    def query(self, state):
        return state.query()

    def sync_view(self, state):
        return state

    def oracle(self, history, params):
        raise NotImplementedError

    def random_op(self, rng, rid, replicas, params):
        raise NotImplementedError

    def random_params(self, rng, replicas) -> dict:
        return {}

    def reference(self, ops, params):
        """Sequential replay of ``ops`` (each ``(rid, op)``) on a plain data type."""
        raise NotImplementedError

    def format_query(self, value) -> str:
        if isinstance(value, (frozenset, set)):
            return "{" + ",".join(repr(v) for v in canon_sorted(value)) + "}"
        return repr(value)


def _set_op(rng):
    return ("add" if rng.chance(0.6) else "rmv", rng.choice(ELEMENTS))


def _seq_set(ops):
    s = set()
    for _, (name, e) in ops:
        (s.add if name == "add" else s.discard)(e)
    return frozenset(s)


class GCounterAdapter(TypeAdapter):
    tag = "gcounter"
    ops = {"inc": (0, 1)}
    models = ("state", "delta")

    def initial(self, params, replicas):
        return GCounter()

    def apply(self, state, rid, op, ts):
        return state.inc(rid, *op[1:])

    def event(self, op):
        return ("inc", op[1] if len(op) > 1 else 1, None)

    def oracle(self, history, params):
        return oracle.eval_counter(history)

    def random_op(self, rng, rid, replicas, params):
        return ("inc",)

    def reference(self, ops, params):
        return sum(op[1] if len(op) > 1 else 1 for _, op in ops)


class PNCounterAdapter(GCounterAdapter):
    tag = "pncounter"
    ops = {"inc": (0, 1), "dec": (0, 1)}

    def initial(self, params, replicas):
        return PNCounter()

    def apply(self, state, rid, op, ts):
        return state.inc(rid, *op[1:]) if op[0] == "inc" else state.dec(rid, *op[1:])

    def event(self, op):
        return (op[0], op[1] if len(op) > 1 else 1, None)

    def random_op(self, rng, rid, replicas, params):
        return ("inc",) if rng.chance(0.5) else ("dec",)

    def reference(self, ops, params):
        return sum((1 if op[0] == "inc" else -1) * (op[1] if len(op) > 1 else 1) for _, op in ops)


class LWWRegisterAdapter(TypeAdapter):
    tag = "lwwreg"
    ops = {"wr": (1, 1)}

    def initial(self, params, replicas):
        return LWWRegister()

    def apply(self, state, rid, op, ts):
        return state.write(op[1], ts)

    def event(self, op):
        return ("wr", op[1], None)

    def oracle(self, history, params):
        return oracle.eval_lww_register(history)

    def random_op(self, rng, rid, replicas, params):
        return ("wr", rng.randint(0, 9))

    def reference(self, ops, params):
        return frozenset([ops[-1][1][1]]) if ops else frozenset()


class MVRegisterAdapter(LWWRegisterAdapter):
    tag = "mvreg"
    models = ("state", "delta")

    def initial(self, params, replicas):
        return MVRegister()

    def apply(self, state, rid, op, ts):
        return state.write(op[1], next_dot(state.context.vv, rid))

    def oracle(self, history, params):
        return oracle.eval_mv_register(history)

    def reference(self, ops, params):
        return (ops[-1][1][1],) if ops else ()

    def format_query(self, value):
        return "[" + ",".join(repr(v) for v in value) + "]"


class AWSetAdapter(TypeAdapter):
    tag = "awset"
    ops = {"add": (1, 1), "rmv": (1, 1)}
    models = ("state", "delta")

    def initial(self, params, replicas):
        return AWSet()

    def apply(self, state, rid, op, ts):
        if op[0] == "add":
            return state.add(op[1], next_dot(state.context.vv, rid))
        return state.rmv(op[1])

    def event(self, op):
        return (op[0], op[1], None)

    def oracle(self, history, params):
        return oracle.eval_aw_set(history)

    def random_op(self, rng, rid, replicas, params):
        return _set_op(rng)

    def reference(self, ops, params):
        return _seq_set(ops)


class RWSetAdapter(AWSetAdapter):
    tag = "rwset"
    models = ("state",)

    def initial(self, params, replicas):
        return RWSet()

    def apply(self, state, rid, op, ts):
        d = next_dot(state.context.vv, rid)
        return state.add(op[1], d) if op[0] == "add" else state.rmv(op[1], d)

    def oracle(self, history, params):
        return oracle.eval_rw_set(history)


class LWWSetAdapter(AWSetAdapter):
    tag = "lwwset"
    models = ("state",)

    def initial(self, params, replicas):
        return LWWSet()

    def apply(self, state, rid, op, ts):
        return state.add(op[1], ts) if op[0] == "add" else state.rmv(op[1], ts)

    def oracle(self, history, params):
        return oracle.eval_lww_set(history)


class BoundedCounterAdapter(TypeAdapter):
    tag = "bcounter"
    ops = {"inc": (1, 1), "dec": (1, 1), "transfer": (2, 2)}

    def _params(self, params, replicas):
        initial = params.get("initial", 10)
        allocation = params.get("allocation") or even_allocation(initial, replicas)
        return initial, allocation

    def initial(self, params, replicas):
        initial, allocation = self._params(params, replicas)
        return bc_new(initial, replicas, allocation)

    def init_events(self, params):
        return [("wr", params.get("initial", 10), None)]

    def apply(self, state, rid, op, ts):
        try:
            if op[0] == "inc":
                return state.inc(rid, op[1])
            if op[0] == "dec":
                return state.dec(rid, op[1])
            if op[0] == "transfer":
                return state.transfer(rid, op[1], op[2])
        except InsufficientRights as exc:
            raise Rejected("insufficient-rights") from exc
        raise ValueError(f"unknown bounded counter op {op[0]!r}")

    def event(self, op):
        if op[0] in ("inc", "dec"):
            return (op[0], op[1], None)
        return None

    def oracle(self, history, params):
        return oracle.eval_ww_counter(history)

    def random_op(self, rng, rid, replicas, params):
        x = rng.random()
        if x < 0.25:
            return ("inc", rng.randint(1, 3))
        others = [r for r in replicas if r != rid]
        if x < 0.75 or not others:
            return ("dec", rng.randint(1, 3))
        return ("transfer", rng.choice(others), rng.randint(0, 3))

    def random_params(self, rng, replicas):
        return {"initial": rng.randint(0, 12)}

    def reference(self, ops, params):
        """Scalar replay of the accepted operations; transfers do not move the value."""
        value = params.get("initial", 10)
        for _, op in ops:
            if op[0] == "inc":
                value += op[1]
            elif op[0] == "dec":
                value -= op[1]
        return value


class TopKAdapter(TypeAdapter):
    tag = "topk"
    ops = {"add": (2, 2), "rmv": (1, 1)}

    def initial(self, params, replicas):
        return TopKSet(params.get("k", 2))

    def apply(self, state, rid, op, ts):
        if op[0] == "add":
            out, _ = state.add(op[1], op[2], next_dot(state.ctx, rid))
        else:
            out, _ = state.rmv(op[1])
        return out

    def event(self, op):
        return ("add", op[1], op[2]) if op[0] == "add" else ("rmv", op[1], None)

    def sync_view(self, state):
        return state.snapshot()

    def oracle(self, history, params):
        return oracle.eval_topk(history, params.get("k", 2))

    def random_op(self, rng, rid, replicas, params):
        e = rng.choice(("a", "b", "c", "d", "e", "f"))
        if rng.chance(0.7):
            return ("add", e, rng.randint(0, 20))
        return ("rmv", e)

    def random_params(self, rng, replicas):
        return {"k": rng.randint(1, 3)}

    def reference(self, ops, params):
        best: dict = {}
        for n, (_, op) in enumerate(ops):
            key = canon_key(op[1])
            if op[0] == "add":
                rank = (op[2], key, n)
                if key not in best or best[key][0] < rank:
                    best[key] = (rank, op[1])
            else:
                best.pop(key, None)
        ranked = sorted(best.values(), key=lambda p: p[0], reverse=True)
        return tuple(e for _, e in ranked[: params.get("k", 2)])


class OpCounterAdapter(TypeAdapter):
    tag = "opcounter"
    ops = {"add": (1, 1), "inc": (0, 1), "dec": (0, 1)}
    models = ("op",)

    def initial(self, params, replicas):
        return OpCounter()

    def event(self, op):
        n = op[1] if len(op) > 1 else 1
        if op[0] == "dec":
            n = -n
        return ("inc", n, None) if n >= 0 else ("dec", -n, None)

    def oracle(self, history, params):
        return oracle.eval_counter(history)

    def random_op(self, rng, rid, replicas, params):
        n = rng.randint(1, 3)
        return ("add", n if rng.chance(0.5) else -n)

    def reference(self, ops, params):
        total = 0
        for _, op in ops:
            n = op[1] if len(op) > 1 else 1
            total += -n if op[0] == "dec" else n
        return total


class OpWWCounterAdapter(TypeAdapter):
    tag = "opwwcounter"
    ops = {"wr": (1, 1), "inc": (0, 1), "dec": (0, 1)}
    models = ("op",)

    def initial(self, params, replicas):
        return OpWWCounter()

    def event(self, op):
        if op[0] == "wr":
            return ("wr", op[1], None)
        return (op[0], op[1] if len(op) > 1 else 1, None)

    def oracle(self, history, params):
        return oracle.eval_ww_counter(history)

    def random_op(self, rng, rid, replicas, params):
        x = rng.random()
        if x < 0.2:
            return ("wr", rng.randint(0, 20))
        return ("inc",) if x < 0.6 else ("dec",)

    def reference(self, ops, params):
        value = 0
        for _, op in ops:
            if op[0] == "wr":
                value = op[1]
            else:
                value += (1 if op[0] == "inc" else -1) * (op[1] if len(op) > 1 else 1)
        return value


class OpAWSetAdapter(AWSetAdapter):
    tag = "opawset"
    models = ("op",)

    def initial(self, params, replicas):
        return OpAWSet()


ADAPTERS: dict[str, TypeAdapter] = {
    a.tag: a
    for a in (
        GCounterAdapter(), PNCounterAdapter(), LWWRegisterAdapter(), MVRegisterAdapter(),
        AWSetAdapter(), RWSetAdapter(), LWWSetAdapter(), BoundedCounterAdapter(), TopKAdapter(),
        OpCounterAdapter(), OpWWCounterAdapter(), OpAWSetAdapter(),
    )
}


def type_model_pairs() -> list[tuple[str, str]]:
    return [(tag, m) for tag, a in ADAPTERS.items() for m in a.models]
