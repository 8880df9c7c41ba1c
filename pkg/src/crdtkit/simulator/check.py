"""Post-run verdicts: replicas against each other and against the oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Optional

from crdtkit.oracle import InvalidHistory, history_validate


@dataclass
class Report:
    ok: bool
    kind: str = "converged"  # converged | replica-divergence | oracle-divergence | invalid-history | ...
    witness: tuple = ()
    values: dict = field(default_factory=dict)
    oracle: Any = None
    detail: str = ""

    def __str__(self) -> str:
        if self.ok:
            return f"converged: {self.oracle!r}"
        lines = [f"{self.kind}: " + " vs ".join(str(w) for w in self.witness)]
        if self.detail:
            lines.append(f"  {self.detail}")
        for rid, v in sorted(self.values.items()):
            lines.append(f"  {rid}: {v!r}")
        lines.append(f"  oracle: {self.oracle!r}")
        return "\n".join(lines)


def check_convergence(result) -> Report:
    adapter = result.adapter
    values = {rid: adapter.query(s) for rid, s in result.states.items()}
    bad = history_validate(result.history)
    if bad is not None:
        return Report(False, "invalid-history", bad.witness, values, None, str(bad))
    try:
        expected = adapter.oracle(result.history, result.scenario.params)
    except InvalidHistory as exc:
        return Report(False, "invalid-history", (), values, None, str(exc))
    for a, b in combinations(sorted(values), 2):
        if values[a] != values[b]:
            return Report(False, "replica-divergence", (a, b), values, expected)
    for rid in sorted(values):
        if values[rid] != expected:
            return Report(False, "oracle-divergence", (rid, "oracle"), values, expected)
    if result.stats.stalled:
        return Report(False, "sync-stalled", tuple(sorted(values)), values, expected,
                      "replicas agree on the query but never reached identical states")
    return Report(True, values=values, oracle=expected)


def check_safety(result) -> Optional[Report]:
    """Run-time invariants recorded by the runner; None when all hold."""
    st = result.stats
    values = {rid: result.adapter.query(s) for rid, s in result.states.items()}
    if st.commute_failures:
        rid, a, b = st.commute_failures[0]
        return Report(False, "non-commuting-effectors", (a, b), values, detail=f"at replica {rid}")
    if st.min_local_rights is not None and st.min_local_rights < 0:
        return Report(False, "negative-rights", (), values, detail=f"min local rights {st.min_local_rights}")
    if st.min_value is not None and st.min_value < 0:
        return Report(False, "negative-value", (), values, detail=f"min value {st.min_value}")
    leaked = st.transmitted - st.ever_top
    if leaked:
        return Report(False, "non-top-transmitted", tuple(sorted(leaked)), values)
    return None
