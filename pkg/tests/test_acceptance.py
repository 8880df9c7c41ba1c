"""Acceptance suite: one verdict line per criterion.

Run under pytest (verdicts appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import os
import subprocess
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from crdtkit.causality import VersionVector
from crdtkit.simulator import ADAPTERS, check_convergence, run, shipped, type_model_pairs
from crdtkit.simulator.fuzz import FuzzConfig, fuzz, random_scenario, run_seed, sequential_scenario
from crdtkit.simulator.types import GCounterAdapter
from crdtkit.state_crdts import GCounter
from worlds import LATTICE_TYPES, lattice_violations, random_world

VERDICTS: list[str] = []

FIGURES = {
    "fig1_awset": frozenset({"a"}),
    "fig1_rwset": frozenset(),
    "fig1_lwwset_a": frozenset({"a"}),
    "fig1_lwwset_b": frozenset(),
    "fig2_awset": frozenset({"a", "b"}),
}


def verdict(n, ok, text):
    VERDICTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {text}")
    print(VERDICTS[-1])
    assert ok, text


def test_c01_figure_reproduction():
    t0 = time.perf_counter()
    wrong = []
    for name, expect in FIGURES.items():
        result = run(shipped(name))
        report = check_convergence(result)
        finals = {rid: result.adapter.query(s) for rid, s in result.states.items()}
        if not report.ok or any(v != expect for v in finals.values()):
            wrong.append(f"{name}={finals}")
    elapsed = time.perf_counter() - t0
    verdict(1, not wrong and elapsed < 1.0,
            f"figure scenarios reproduce exactly in {elapsed:.3f}s (limit 1s)" + (f"; wrong: {wrong}" if wrong else ""))


def test_c02_oracle_agreement_fuzz():
    slow, bad, worst = [], [], 0.0
    for tag, model in type_model_pairs():
        t0 = time.perf_counter()
        summary = fuzz(FuzzConfig(tag, model, replicas=4, ops=40, runs=1000, seed=2024, stop_on_failure=False))
        dt = time.perf_counter() - t0
        worst = max(worst, dt)
        if summary.runs != 1000 or summary.failures:
            bad.append(f"{tag}/{model}: {len(summary.failures)} failures, first seed "
                       f"{summary.failures[0].seed if summary.failures else '-'}")
        if summary.dropped == 0 or summary.duplicated == 0:
            bad.append(f"{tag}/{model}: faults were not exercised")
        if dt >= 60:
            slow.append(f"{tag}/{model} {dt:.1f}s")
    pairs = len(type_model_pairs())
    verdict(2, not bad and not slow, f"1000 faulty runs x {pairs} type/model pairs agree with the oracle, slowest pair {worst:.1f}s (limit 60s)"
            + (f"; {bad}" if bad else "") + (f"; over 60s: {slow}" if slow else ""))


def test_c03_lattice_laws():
    bad = []
    for tag in LATTICE_TYPES:
        deflations = []

        def check(before, after):
            if not before.leq(after):
                deflations.append((before, after))

        for i in range(1000):
            a, b, c = random_world(tag, run_seed(i), on_update=check)
            broken = lattice_violations(a, b, c)
            if broken:
                bad.append(f"{tag} seed {run_seed(i)}: {broken}")
                break
        if deflations:
            bad.append(f"{tag}: {len(deflations)} non-inflationary updates")
    verdict(3, not bad, f"join laws and update inflation over 1000 triples x {len(LATTICE_TYPES)} types"
            + (f"; {bad}" if bad else ""))


def test_c04_sequential_semantics():
    bad = []
    for tag, model in type_model_pairs():
        adapter = ADAPTERS[tag]
        for replicas in (1, 3):
            for i in range(500):
                sc = sequential_scenario(tag, model, replicas, 40, run_seed(i))
                r = run(sc)
                for _, rid, value, n in r.queries:
                    expect = adapter.reference(r.applied[:n], sc.params)
                    if value != expect:
                        bad.append(f"{tag}/{model} replicas={replicas} seed={sc.seed}: {value!r} != {expect!r}")
                        break
                if bad:
                    break
    verdict(4, not bad, "500 single-replica and 500 synced multi-replica scripts per type match sequential replay"
            + (f"; {bad[:3]}" if bad else ""))


def test_c05_effector_commutativity():
    pairs, failures, runs = 0, 0, 0
    for tag, model in type_model_pairs():
        if model != "op":
            continue
        for i in range(1000):
            sc = random_scenario(tag, model, 4, 40, run_seed(50_000 + i))
            r = run(sc)
            runs += 1
            pairs += r.stats.commute_pairs
            failures += len(r.stats.commute_failures)
    verdict(5, failures == 0 and pairs > 0,
            f"{pairs} concurrent effector pairs commute across {runs} op-mode runs ({failures} failures)")


def test_c06_delta_equivalence():
    mismatched, total = [], 0
    for tag, model in type_model_pairs():
        if model != "delta":
            continue
        for i in range(500):
            sc = random_scenario(tag, "delta", 4, 40, run_seed(70_000 + i))
            total += 1
            d = run(sc)
            s = run(replace(sc, sync_model="state"))
            if d.states != s.states:
                mismatched.append(f"{tag} seed {sc.seed}")
    verdict(6, not mismatched, f"delta-mode final states equal state-mode in {total - len(mismatched)}/{total} scenarios"
            + (f"; {mismatched[:3]}" if mismatched else ""))


def test_c07_bounded_counter():
    adapter = ADAPTERS["bcounter"]
    bad, low_rights, low_value = [], 0, 0
    for i in range(1000):
        sc = random_scenario("bcounter", "state", 4, 40, run_seed(90_000 + i))
        r = run(sc)
        low_rights = min(low_rights, r.stats.min_local_rights)
        low_value = min(low_value, r.stats.min_value)
        expect = adapter.reference(r.applied, sc.params)
        values = {adapter.query(s) for s in r.states.values()}
        if values != {expect} or not check_convergence(r).ok:
            bad.append(f"seed {sc.seed}: {values} vs {expect}")
    verdict(7, not bad and low_rights >= 0 and low_value >= 0,
            f"1000 runs: min local rights {low_rights}, min merged value {low_value}, merged value = scalar replay"
            + (f"; {bad[:3]}" if bad else ""))


def test_c08_topk():
    adapter = ADAPTERS["topk"]
    bad, leaked, sent = [], 0, 0
    for i in range(500):
        sc = random_scenario("topk", "state", 4, 40, run_seed(110_000 + i))
        r = run(sc)
        expect = adapter.oracle(r.history, sc.params)
        reads = {adapter.query(s) for s in r.states.values()}
        if reads != {expect}:
            bad.append(f"seed {sc.seed}: {reads} vs {expect}")
        leaked += len(r.stats.transmitted - r.stats.ever_top)
        sent += len(r.stats.transmitted)
    verdict(8, not bad and leaked == 0,
            f"500 runs converge to the reference top-K; {leaked} of {sent} transmitted adds never reached a top"
            + (f"; {bad[:3]}" if bad else ""))


DETERMINISM_SCRIPT = """
import hashlib, sys
from crdtkit.simulator import run, shipped, shipped_names, random_scenario
from crdtkit.simulator.fuzz import run_seed
scs = [shipped(n) for n in shipped_names()]
for i, (t, m) in enumerate([("awset", "delta"), ("opawset", "op"), ("topk", "state"), ("bcounter", "state"),
                            ("rwset", "state"), ("mvreg", "delta"), ("opwwcounter", "op"), ("lwwset", "state"),
                            ("pncounter", "delta"), ("lwwreg", "state"), ("opcounter", "op")]):
    scs.append(random_scenario(t, m, 4, 40, run_seed(130_000 + i)))
for sc in scs:
    print(sc.name, hashlib.sha256(run(sc).trace.to_bytes()).hexdigest())
"""


def test_c09_determinism():
    outs = []
    for hashseed in ("1", "2"):
        env = {**os.environ, "PYTHONHASHSEED": hashseed}
        proc = subprocess.run([sys.executable, "-c", DETERMINISM_SCRIPT], env=env,
                              capture_output=True, text=True, check=True)
        outs.append(proc.stdout.splitlines())
    same = outs[0] == outs[1]
    verdict(9, same and len(outs[0]) == 20,
            f"{len(outs[0])} scenarios give byte-identical traces across processes and hash seeds")


@dataclass(frozen=True)
class MinMergeGCounter(GCounter):
    """Test double: merges with entrywise min instead of max."""

    def merge(self, other):
        keys = set(self.counts) | set(other.counts)
        return MinMergeGCounter(VersionVector({k: min(self.counts[k], other.counts[k]) for k in keys}))

    def inc(self, r, n=1):
        return MinMergeGCounter(super().inc(r, n).counts)


class MinMergeAdapter(GCounterAdapter):
    def initial(self, params, replicas):
        return MinMergeGCounter()


def test_c10_negative_control():
    summary = fuzz(FuzzConfig("gcounter", "state", replicas=3, ops=10, runs=50, seed=1), adapter=MinMergeAdapter())
    fail = summary.first_failure
    caught = fail is not None and not fail.report.ok and len(fail.report.witness) == 2
    # the correct type passes the same fuzz configuration
    control = fuzz(FuzzConfig("gcounter", "state", replicas=3, ops=10, runs=50, seed=1))
    detail = (f"{fail.report.kind} witness {fail.report.witness} at seed {fail.seed}" if fail else "not caught")
    verdict(10, caught and control.ok, f"min-merge GCounter is caught: {detail}")


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-q", "-s"]))
