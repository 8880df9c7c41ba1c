"""Deterministic event log: ``<tick>\\t<event-kind>\\t<fields...>`` per line."""

from __future__ import annotations

KINDS = (
    "update-applied",
    "update-rejected",
    "message-sent",
    "message-dropped",
    "message-delivered",
    "query-result",
    "convergence-check",
)


def _field(v) -> str:
    s = v if isinstance(v, str) else repr(v)
    return s.replace("\t", " ").replace("\n", " ")


class Trace:
    def __init__(self):
        self.lines: list[str] = []

    def emit(self, tick: int, kind: str, *fields) -> None:
        if kind not in KINDS:
            raise ValueError(f"unknown trace event {kind!r}")
        self.lines.append("\t".join([str(tick), kind, *(_field(f) for f in fields)]))

    def text(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")

    def to_bytes(self) -> bytes:
        return self.text().encode("utf-8")

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.text())

    def of_kind(self, kind: str) -> list[list[str]]:
        return [parts for parts in (ln.split("\t") for ln in self.lines) if parts[1] == kind]

    def __len__(self) -> int:
        return len(self.lines)
