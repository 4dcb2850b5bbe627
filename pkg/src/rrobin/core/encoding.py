"""Canonical byte encoding.

Fields are written in declaration order. Integers are fixed-width big-endian,
byte strings and lists carry a 4-byte length prefix. Every hash and every
signature in the package is computed over this encoding.
"""

from __future__ import annotations

import struct

_U32 = struct.Struct(">I")
_U64 = struct.Struct(">Q")


class DecodeError(ValueError):
    pass


class Writer:
    __slots__ = ("_parts",)

    def __init__(self) -> None:
        self._parts: list[bytes] = []

    def u8(self, v: int) -> "Writer":
        self._parts.append(bytes((v,)))
        return self

    def u32(self, v: int) -> "Writer":
        self._parts.append(_U32.pack(v))
        return self

    def u64(self, v: int) -> "Writer":
        self._parts.append(_U64.pack(v))
        return self

    def blob(self, b: bytes) -> "Writer":
        self._parts.append(_U32.pack(len(b)))
        self._parts.append(b)
        return self

    def raw(self, b: bytes) -> "Writer":
        self._parts.append(b)
        return self

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    __slots__ = ("_buf", "_pos")

    def __init__(self, buf: bytes) -> None:
        self._buf = memoryview(buf)
        self._pos = 0

    def _take(self, n: int) -> bytes:
        end = self._pos + n
        if n < 0 or end > len(self._buf):
            raise DecodeError("truncated input")
        out = bytes(self._buf[self._pos:end])
        self._pos = end
        return out

    def fixed(self, n: int) -> bytes:
        return self._take(n)

    def u8(self) -> int:
        return self._take(1)[0]

    def u32(self) -> int:
        return _U32.unpack(self._take(4))[0]

    def u64(self) -> int:
        return _U64.unpack(self._take(8))[0]

    def blob(self, max_len: int = 1 << 26) -> bytes:
        n = self.u32()
        if n > max_len:
            raise DecodeError("length prefix too large")
        return self._take(n)

    def count(self, max_items: int = 1 << 20) -> int:
        n = self.u32()
        if n > max_items:
            raise DecodeError("list too long")
        return n

    @property
    def remaining(self) -> int:
        return len(self._buf) - self._pos

    def done(self) -> None:
        if self._pos != len(self._buf):
            raise DecodeError("trailing bytes")
