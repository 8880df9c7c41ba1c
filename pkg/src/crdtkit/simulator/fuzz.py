"""Random scenarios over a faulty network, checked against the oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from crdtkit.simulator.check import Report, check_convergence, check_safety
from crdtkit.simulator.rng import XorShift64Star, key_hash
from crdtkit.simulator.runner import run
from crdtkit.simulator.scenario import Scenario
from crdtkit.simulator.types import ADAPTERS

REPLICA_NAMES = ("A", "B", "C", "D", "E", "F", "G", "H")


def random_scenario(tag: str, model: str, replicas: int = 4, ops: int = 40, seed: int = 0,
                    faults: bool = True) -> Scenario:
    """Up to ``replicas`` replicas and ``ops`` updates, ending in a full sync."""
    adapter = ADAPTERS[tag]
    if model not in adapter.models:
        raise ValueError(f"{tag} does not support the {model} model")
    if not 1 <= replicas <= len(REPLICA_NAMES):
        raise ValueError(f"replica count must lie in 1..{len(REPLICA_NAMES)}")
    rng = XorShift64Star.keyed(seed, "scenario", tag, model)
    names = list(REPLICA_NAMES[: rng.randint(min(2, replicas), replicas)])
    params = adapter.random_params(rng, names)
    script: list = []
    if faults:
        script.append({"net": {"drop": rng.randint(0, 30) / 100, "dup": rng.randint(0, 20) / 100,
                               "reorder": rng.randint(0, 3)}})
    for _ in range(rng.randint(1, ops)):
        rid = rng.choice(names)
        op = adapter.random_op(rng, rid, names, params)
        script.append({"at": rid, "do": op[0], "args": tuple(op[1:])})
        while len(names) > 1 and rng.chance(0.4):
            src = rng.choice(names)
            dst = rng.choice([r for r in names if r != src])
            script.append({"sync": (src, dst)})
    script.append({"sync": "full"})
    for rid in names:
        script.append({"at": rid, "do": "query"})
    return Scenario(name=f"fuzz-{tag}-{model}-{seed}", crdt=tag, replicas=names, script=script,
                    sync_model=model, seed=seed, params=params)


def sequential_scenario(tag: str, model: str, replicas: int = 1, ops: int = 40, seed: int = 0) -> Scenario:
    """Lossless script with a full sync after every update, so execution is sequential."""
    adapter = ADAPTERS[tag]
    rng = XorShift64Star.keyed(seed, "sequential", tag, model)
    names = list(REPLICA_NAMES[:replicas])
    params = adapter.random_params(rng, names)
    script: list = []
    for _ in range(rng.randint(1, ops)):
        rid = rng.choice(names)
        op = adapter.random_op(rng, rid, names, params)
        script.append({"at": rid, "do": op[0], "args": tuple(op[1:])})
        script.append({"sync": "full"})
        script.append({"at": rng.choice(names), "do": "query"})
    return Scenario(name=f"seq-{tag}-{model}-{seed}", crdt=tag, replicas=names, script=script,
                    sync_model=model, seed=seed, params=params)


def run_seed(seed: int) -> int:
    return key_hash("run", seed) & 0x7FFFFFFF


@dataclass
class FuzzConfig:
    type: str
    model: str
    replicas: int = 4
    ops: int = 40
    runs: int = 100
    seed: int = 0
    stop_on_failure: bool = True


@dataclass
class Failure:
    seed: int
    report: Report


@dataclass
class FuzzSummary:
    config: FuzzConfig
    runs: int = 0
    failures: list = field(default_factory=list)
    commute_pairs: int = 0
    ops: int = 0
    rejected: int = 0
    sent: int = 0
    dropped: int = 0
    duplicated: int = 0
    bytes_sent: int = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def first_failure(self) -> Optional[Failure]:
        return self.failures[0] if self.failures else None


def check_one(scenario: Scenario, adapter=None) -> tuple:
    result = run(scenario, adapter=adapter)
    report = check_safety(result) or check_convergence(result)
    return result, report


def fuzz(config: FuzzConfig, adapter=None) -> FuzzSummary:
    summary = FuzzSummary(config)
    for i in range(config.runs):
        seed = run_seed(config.seed * 1_000_003 + i)
        sc = random_scenario(config.type, config.model, config.replicas, config.ops, seed)
        result, report = check_one(sc, adapter)
        summary.runs += 1
        summary.commute_pairs += result.stats.commute_pairs
        summary.ops += result.stats.updates
        summary.rejected += result.stats.rejected
        summary.sent += result.net.sent
        summary.dropped += result.net.dropped
        summary.duplicated += result.net.duplicated
        summary.bytes_sent += result.net.bytes_sent
        if not report.ok:
            summary.failures.append(Failure(seed, report))
            if config.stop_on_failure:
                break
    return summary
