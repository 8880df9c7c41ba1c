"""Canonical, length-prefixed binary encoding.

Layout of every item: one tag byte, then a 4-byte big-endian length, then the
body. Containers encode their items in order; ``dict`` items are sorted by key
encoding and sets by item encoding, so the output is byte-stable for equal
values regardless of construction order or hash seed.

Tags::

    N none   T true   F false   I int (signed, big-endian, minimal width)
    S str (utf-8)   B bytes   L list/tuple   M dict   U set/frozenset
"""

from __future__ import annotations

import struct

_LEN = struct.Struct(">I")


class DecodeError(ValueError):
    pass


def _frame(tag: bytes, body: bytes) -> bytes:
    return tag + _LEN.pack(len(body)) + body


def encode(value) -> bytes:
    if value is None:
        return _frame(b"N", b"")
    if value is True:
        return _frame(b"T", b"")
    if value is False:
        return _frame(b"F", b"")
    if isinstance(value, int):
        width = max(1, (value.bit_length() + 8) // 8)
        return _frame(b"I", value.to_bytes(width, "big", signed=True))
    if isinstance(value, str):
        return _frame(b"S", value.encode("utf-8"))
    if isinstance(value, (bytes, bytearray)):
        return _frame(b"B", bytes(value))
    if isinstance(value, (list, tuple)):
        return _frame(b"L", b"".join(encode(v) for v in value))
    if isinstance(value, dict):
        items = sorted((encode(k), encode(v)) for k, v in value.items())
        return _frame(b"M", b"".join(k + v for k, v in items))
    if isinstance(value, (set, frozenset)):
        return _frame(b"U", b"".join(sorted(encode(v) for v in value)))
    raise TypeError(f"cannot encode {type(value).__name__}")


def _decode_at(buf: bytes, pos: int):
    if pos + 5 > len(buf):
        raise DecodeError("truncated header")
    tag = buf[pos:pos + 1]
    (n,) = _LEN.unpack_from(buf, pos + 1)
    start, end = pos + 5, pos + 5 + n
    if end > len(buf):
        raise DecodeError("truncated body")
    body = buf[start:end]
    if tag == b"N":
        return None, end
    if tag == b"T":
        return True, end
    if tag == b"F":
        return False, end
    if tag == b"I":
        return int.from_bytes(body, "big", signed=True), end
    if tag == b"S":
        return body.decode("utf-8"), end
    if tag == b"B":
        return body, end
    if tag in (b"L", b"M", b"U"):
        items = []
        p = start
        while p < end:
            v, p = _decode_at(buf, p)
            items.append(v)
        if tag == b"L":
            return tuple(items), end
        if tag == b"U":
            return frozenset(items), end
        if len(items) % 2:
            raise DecodeError("odd dict body")
        return dict(zip(items[::2], items[1::2])), end
    raise DecodeError(f"unknown tag {tag!r}")


def decode(buf: bytes):
    value, end = _decode_at(buf, 0)
    if end != len(buf):
        raise DecodeError("trailing bytes")
    return value


def canon_key(v):
    """Sort key giving a deterministic total order over mixed opaque values."""
    return (type(v).__name__, v)


def canon_sorted(values):
    return sorted(values, key=canon_key)
