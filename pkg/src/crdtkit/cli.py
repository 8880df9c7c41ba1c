"""Command line: run scenarios, fuzz a type under a sync model, print oracle verdicts.

Exit codes: 0 success, 1 divergence or failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys

from crdtkit.simulator.check import check_convergence, check_safety
from crdtkit.simulator.fuzz import FuzzConfig, fuzz, random_scenario
from crdtkit.simulator.runner import run
from crdtkit.simulator.scenario import InvalidScenario, load
from crdtkit.simulator.types import ADAPTERS

OK, FAILED, INVALID = 0, 1, 2


def _load(path):
    try:
        return load(path)
    except OSError as exc:
        raise InvalidScenario(f"cannot read {path}: {exc.strerror}") from exc


def cmd_run(args) -> int:
    sc = _load(args.scenario)
    result = run(sc, seed=args.seed)
    if args.trace:
        result.trace.write(args.trace)
    fmt = result.adapter.format_query
    for tick, rid, value, _ in result.queries:
        print(f"t={tick} {rid}: {fmt(value)}")
    for rid, state in result.states.items():
        print(f"final {rid}: {fmt(result.adapter.query(state))}")
    report = check_safety(result) or check_convergence(result)
    print(report if not report.ok else f"ok: {fmt(report.oracle)}")
    return OK if report.ok else FAILED


def cmd_oracle(args) -> int:
    sc = _load(args.scenario)
    result = run(sc)
    print(result.adapter.format_query(result.adapter.oracle(result.history, sc.params)))
    return OK


def cmd_fuzz(args) -> int:
    adapter = ADAPTERS.get(args.type)
    if adapter is None:
        raise InvalidScenario(f"unknown type {args.type!r}; choose from {', '.join(ADAPTERS)}")
    if args.model not in adapter.models:
        raise InvalidScenario(f"{args.type} supports {', '.join(adapter.models)}, not {args.model}")
    if not 1 <= args.replicas <= 8 or args.ops < 1 or args.runs < 0 or args.seed < 0:
        raise InvalidScenario("replicas must lie in 1..8; ops >= 1; runs and seed >= 0")
    cfg = FuzzConfig(args.type, args.model, args.replicas, args.ops, args.runs, args.seed)
    summary = fuzz(cfg)
    print(f"{args.type}/{args.model}: {summary.runs} runs, {summary.ops} ops "
          f"({summary.rejected} rejected), {summary.sent} messages, {summary.dropped} dropped, "
          f"{summary.duplicated} duplicated, {summary.bytes_sent} bytes")
    if summary.ok:
        print("all runs passed")
        return OK
    fail = summary.first_failure
    print(f"FAILED at seed {fail.seed}")
    print(fail.report)
    sc = random_scenario(args.type, args.model, args.replicas, args.ops, fail.seed)
    print(json.dumps(sc.to_json(), sort_keys=True))
    return FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crdtkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a scenario and check convergence")
    r.add_argument("scenario")
    r.add_argument("--trace", help="write the event trace to this file")
    r.add_argument("--seed", type=int, help="override the scenario's network seed")
    r.set_defaults(func=cmd_run)

    f = sub.add_parser("fuzz", help="random scenarios checked against the oracle")
    f.add_argument("--type", required=True)
    f.add_argument("--model", default="state")
    f.add_argument("--replicas", type=int, default=3)
    f.add_argument("--ops", type=int, default=40)
    f.add_argument("--runs", type=int, default=100)
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=cmd_fuzz)

    o = sub.add_parser("oracle", help="print the oracle's value for a scenario's history")
    o.add_argument("scenario")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INVALID if exc.code else OK
    try:
        return args.func(args)
    except InvalidScenario as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return INVALID


if __name__ == "__main__":
    sys.exit(main())
