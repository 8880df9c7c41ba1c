"""Reachable states for lattice checks: random updates and merges on three replicas."""

from crdtkit.causality import HybridTimestamp
from crdtkit.simulator.rng import XorShift64Star
from crdtkit.simulator.types import ADAPTERS, Rejected

LATTICE_TYPES = ("gcounter", "pncounter", "lwwreg", "mvreg", "awset", "rwset", "lwwset", "bcounter")
REPLICAS = ("A", "B", "C")


def random_world(tag, seed, steps=12, on_update=None):
    """Three replica states of ``tag`` after ``steps`` random actions.

    ``on_update(before, after)`` is called for every accepted update.
    """
    adapter = ADAPTERS[tag]
    rng = XorShift64Star.keyed(seed, "world", tag)
    params = adapter.random_params(rng, list(REPLICAS))
    init = adapter.initial(params, list(REPLICAS))
    states = {r: init for r in REPLICAS}
    for t in range(1, rng.randint(1, steps) + 1):
        r = rng.choice(REPLICAS)
        if rng.chance(0.3):
            src = rng.choice(REPLICAS)
            states[r] = states[r].merge(states[src])
            continue
        op = adapter.random_op(rng, r, list(REPLICAS), params)
        try:
            after = adapter.apply(states[r], r, op, HybridTimestamp(t, 0, r))
        except Rejected:
            continue
        if on_update is not None:
            on_update(states[r], after)
        states[r] = after
    return [states[r] for r in REPLICAS]


def lattice_violations(a, b, c):
    """Names of the join-semilattice laws that the triple breaks."""
    bad = []
    ab = a.merge(b)
    if a.merge(b.merge(c)) != ab.merge(c):
        bad.append("associativity")
    if ab != b.merge(a):
        bad.append("commutativity")
    if a.merge(a) != a:
        bad.append("idempotence")
    if not (a.leq(ab) and b.leq(ab)):
        bad.append("upper-bound")
    upper = ab.merge(c)
    if not ab.leq(upper):
        bad.append("least-upper-bound")
    if c.leq(a) != (a.merge(c) == a):
        bad.append("order-consistency")
    if a.leq(c) and b.leq(c) and not ab.leq(c):
        bad.append("least-upper-bound")
    return bad
