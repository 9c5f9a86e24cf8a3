"""Deterministic binary encoding shared by every on-chain data structure.

Integers are unsigned 64-bit little-endian. Variable-length payloads carry a
u64 length prefix. Records encode as their fields concatenated in declaration
order, so any two parties that agree on field order agree on every digest.
Every encoding is canonical: a byte string either fails to decode or decodes
to exactly one value whose re-encoding reproduces the input.
"""

from __future__ import annotations

U64_MAX = 2**64 - 1


class DecodeError(ValueError):
    """Bytes do not parse as a canonical encoding."""


def encode_u64(value: int) -> bytes:
    if not 0 <= value <= U64_MAX:
        raise ValueError(f"u64 out of range: {value}")
    return value.to_bytes(8, "little")


def encode_bool(flag: bool) -> bytes:
    return encode_u64(1 if flag else 0)


def encode_bytes(payload: bytes) -> bytes:
    return encode_u64(len(payload)) + payload


def encode_str(text: str) -> bytes:
    return encode_bytes(text.encode("utf-8"))


def encode_option(value: bytes | None) -> bytes:
    """Optional fixed-width field: u64 presence flag, then the raw bytes."""
    if value is None:
        return encode_u64(0)
    return encode_u64(1) + value


def encode_pairs(pairs: list[tuple[int, int]]) -> bytes:
    """List of (u64, u64) with a u64 count prefix."""
    out = [encode_u64(len(pairs))]
    for a, b in pairs:
        out.append(encode_u64(a))
        out.append(encode_u64(b))
    return b"".join(out)


class Reader:
    """Cursor over a canonical encoding.

    Raises DecodeError on truncation, trailing bytes (via expect_end), or
    field values outside their domain.
    """

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise DecodeError(f"truncated: need {n} bytes at offset {self._pos}")
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def u64(self) -> int:
        return int.from_bytes(self._take(8), "little")

    def fixed(self, n: int) -> bytes:
        return self._take(n)

    def bytes_(self) -> bytes:
        length = self.u64()
        if length > len(self._data) - self._pos:
            raise DecodeError(f"length prefix {length} exceeds remaining input")
        return self._take(length)

    def str_(self) -> str:
        raw = self.bytes_()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError("invalid utf-8 in string field") from exc

    def bool_(self) -> bool:
        value = self.u64()
        if value not in (0, 1):
            raise DecodeError(f"boolean field holds {value}")
        return value == 1

    def option(self, width: int) -> bytes | None:
        flag = self.u64()
        if flag == 0:
            return None
        if flag != 1:
            raise DecodeError(f"option flag holds {flag}")
        return self.fixed(width)

    def pairs(self) -> list[tuple[int, int]]:
        count = self.u64()
        if count > (len(self._data) - self._pos) // 16:
            raise DecodeError(f"pair count {count} exceeds remaining input")
        return [(self.u64(), self.u64()) for _ in range(count)]

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise DecodeError(f"{len(self._data) - self._pos} trailing bytes")
