"""Scenario files: a replicated type, a sync model and a script of steps.

A scenario is JSON::

    {"name": "...", "seed": 1, "crdt": "awset", "sync_model": "state",
     "replicas": ["A", "B"], "params": {}, "init": [["add", "a"]],
     "script": [{"at": "A", "do": "rmv", "args": ["a"]},
                "A->B", {"sync": ["B", "A"]}, {"net": {"drop": 0.1}},
                {"at": "B", "do": "query"}, {"sync": "full"}]}

``init`` operations run once on a common ancestor before the replicas fork.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from crdtkit.oracle import INIT_REPLICA
from crdtkit.simulator.network import NetConfig
from crdtkit.simulator.types import ADAPTERS, TypeAdapter

SYNC_MODELS = ("state", "delta", "op")
SCENARIO_DIR = Path(__file__).parent / "scenarios"


class InvalidScenario(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    crdt: str
    replicas: list
    script: list
    sync_model: str = "state"
    seed: int = 0
    params: dict = field(default_factory=dict)
    init: list = field(default_factory=list)

    @property
    def adapter(self) -> TypeAdapter:
        return ADAPTERS[self.crdt]

    def to_json(self) -> dict:
        def step_json(st):
            if "sync" in st and st["sync"] != "full":
                return {"sync": list(st["sync"])}
            if "args" in st:
                return {"at": st["at"], "do": st["do"], "args": list(st["args"])}
            return dict(st)

        return {
            "name": self.name, "seed": self.seed, "crdt": self.crdt, "sync_model": self.sync_model,
            "replicas": list(self.replicas), "params": self.params,
            "init": [list(op) for op in self.init], "script": [step_json(s) for s in self.script],
        }


def _check_op(adapter, name, args, where):
    if name not in adapter.ops:
        raise InvalidScenario(f"{where}: {adapter.tag} has no operation {name!r}")
    lo, hi = adapter.ops[name]
    if not lo <= len(args) <= hi:
        raise InvalidScenario(f"{where}: {name} takes {lo}..{hi} arguments, got {len(args)}")
    for a in args:
        if isinstance(a, (dict, list, float)) or a is None:
            raise InvalidScenario(f"{where}: unsupported argument {a!r}")


def _step(raw, adapter, replicas, where) -> dict:
    if isinstance(raw, str):
        if "->" not in raw:
            raise InvalidScenario(f"{where}: cannot parse step {raw!r}")
        src, dst = (p.strip() for p in raw.split("->", 1))
        raw = {"sync": [src, dst]}
    if not isinstance(raw, dict):
        raise InvalidScenario(f"{where}: a step must be an object or 'X->Y'")
    if "net" in raw:
        net = raw["net"]
        if not isinstance(net, dict) or set(net) - {"drop", "dup", "reorder"}:
            raise InvalidScenario(f"{where}: net takes drop, dup and reorder")
        try:
            NetConfig(**net)
        except (TypeError, ValueError) as exc:
            raise InvalidScenario(f"{where}: {exc}") from exc
        return {"net": dict(net)}
    if "sync" in raw:
        target = raw["sync"]
        if target == "full":
            return {"sync": "full"}
        if not (isinstance(target, list) and len(target) == 2):
            raise InvalidScenario(f"{where}: sync takes [from, to] or 'full'")
        src, dst = target
        for r in target:
            if r not in replicas:
                raise InvalidScenario(f"{where}: unknown replica {r!r}")
        if src == dst:
            raise InvalidScenario(f"{where}: a replica cannot sync with itself")
        return {"sync": (src, dst)}
    if "at" in raw and "do" in raw:
        if raw["at"] not in replicas:
            raise InvalidScenario(f"{where}: unknown replica {raw['at']!r}")
        if raw["do"] == "query":
            return {"at": raw["at"], "do": "query"}
        args = raw.get("args", [])
        if not isinstance(args, list):
            raise InvalidScenario(f"{where}: args must be a list")
        _check_op(adapter, raw["do"], args, where)
        return {"at": raw["at"], "do": raw["do"], "args": tuple(args)}
    raise InvalidScenario(f"{where}: unrecognised step {raw!r}")


def from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise InvalidScenario("scenario must be a JSON object")
    crdt = data.get("crdt")
    if crdt not in ADAPTERS:
        raise InvalidScenario(f"unknown crdt {crdt!r}")
    adapter = ADAPTERS[crdt]
    model = data.get("sync_model", "state")
    if model not in SYNC_MODELS:
        raise InvalidScenario(f"unknown sync model {model!r}")
    if model not in adapter.models:
        raise InvalidScenario(f"{crdt} does not support the {model} model")
    replicas = data.get("replicas")
    if not (isinstance(replicas, list) and replicas and all(isinstance(r, str) and r for r in replicas)):
        raise InvalidScenario("replicas must be a non-empty list of names")
    if len(set(replicas)) != len(replicas) or INIT_REPLICA in replicas:
        raise InvalidScenario("replica names must be unique and not reserved")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise InvalidScenario("seed must be a non-negative integer")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise InvalidScenario("params must be an object")
    try:
        adapter.initial(params, replicas)
    except (TypeError, ValueError) as exc:
        raise InvalidScenario(f"params: {exc}") from exc
    init = []
    for n, op in enumerate(data.get("init", [])):
        if not (isinstance(op, list) and op and isinstance(op[0], str)):
            raise InvalidScenario(f"init[{n}]: expected [op, args...]")
        _check_op(adapter, op[0], op[1:], f"init[{n}]")
        init.append(tuple(op))
    script = data.get("script")
    if not isinstance(script, list):
        raise InvalidScenario("script must be a list")
    steps = [_step(raw, adapter, replicas, f"script[{n}]") for n, raw in enumerate(script)]
    return Scenario(
        name=str(data.get("name", "unnamed")), crdt=crdt, replicas=list(replicas), script=steps,
        sync_model=model, seed=seed, params=params, init=init,
    )


def load(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidScenario(f"{path}: not valid JSON ({exc})") from exc
    return from_dict(data)


def shipped(name: str) -> Scenario:
    """One of the scenarios bundled with the package, by file stem."""
    return load(SCENARIO_DIR / f"{name}.json")


def shipped_names() -> list[str]:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.json"))
