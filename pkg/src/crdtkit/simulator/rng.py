"""Portable 64-bit generators so traces reproduce across implementations.

Seeding uses SplitMix64; the stream is xorshift64* (shifts 12/25/27,
multiplier 0x2545F4914F6CDD1D). ``randint`` reduces by modulo; the bias is
irrelevant at the ranges used here and keeps the algorithm trivial to port.
"""

from __future__ import annotations

import hashlib

MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def key_hash(*parts) -> int:
    """Stable 64-bit hash of a tuple of str/int parts (first 8 bytes of SHA-256)."""
    text = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "big")


class XorShift64Star:
    def __init__(self, seed: int):
        self.state = splitmix64(seed & MASK) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & MASK

    def random(self) -> float:
        return (self.next_u64() >> 11) / float(1 << 53)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]``."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]

    def chance(self, p: float) -> bool:
        return self.random() < p

    @classmethod
    def keyed(cls, seed: int, *parts) -> "XorShift64Star":
        """Independent stream for one keyed decision (e.g. one message's fate)."""
        return cls(seed ^ key_hash(*parts))
