"""
Canonical binary and text encodings shared by the ledger, Merkle and snapshot code.

Binary frames are length-prefixed with little-endian fixed-width integers.
Structured text (receipts, proposals, ballots) is canonical JSON: sorted keys,
no insignificant whitespace, bytes rendered as lowercase hex.
"""

import json
import struct
from typing import Any, List

from consortium_ledger.common.exceptions import EncodingError

_U8 = struct.Struct("<B")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


def encode_u8(value: int) -> bytes:
    return _U8.pack(value)


def encode_u32(value: int) -> bytes:
    return _U32.pack(value)


def encode_u64(value: int) -> bytes:
    return _U64.pack(value)


def encode_bytes(data: bytes) -> bytes:
    """Length-prefix a byte string with a u32."""
    return _U32.pack(len(data)) + data


def encode_str(text: str) -> bytes:
    return encode_bytes(text.encode("utf-8"))


class Reader:
    """
    Cursor over a byte buffer that decodes the frames produced above.

    Every accessor raises EncodingError instead of returning short data.
    """

    def __init__(self, data: bytes, offset: int = 0):
        self._data = data
        self.offset = offset

    def _take(self, size: int) -> bytes:
        end = self.offset + size
        if size < 0 or end > len(self._data):
            raise EncodingError(
                f"need {size} bytes, {len(self._data) - self.offset} left",
                offset=self.offset,
            )
        chunk = self._data[self.offset : end]
        self.offset = end
        return chunk

    def u8(self) -> int:
        return _U8.unpack(self._take(1))[0]

    def u32(self) -> int:
        return _U32.unpack(self._take(4))[0]

    def u64(self) -> int:
        return _U64.unpack(self._take(8))[0]

    def raw(self, size: int) -> bytes:
        return self._take(size)

    def bytes_(self) -> bytes:
        return self._take(self.u32())

    def str_(self) -> str:
        try:
            return self.bytes_().decode("utf-8")
        except UnicodeDecodeError as e:
            raise EncodingError(f"invalid utf-8: {e}", offset=self.offset)

    @property
    def remaining(self) -> int:
        return len(self._data) - self.offset

    def at_end(self) -> bool:
        return self.offset >= len(self._data)

    def expect_end(self) -> None:
        if not self.at_end():
            raise EncodingError(f"{self.remaining} trailing bytes", offset=self.offset)


def canonical_json(obj: Any) -> bytes:
    """Serialize to canonical JSON bytes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def parse_json(data: bytes) -> Any:
    try:
        return json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise EncodingError(f"invalid JSON document: {e}")


def hex_list(items: List[bytes]) -> List[str]:
    return [item.hex() for item in items]


def from_hex(text: str, field: str = "value") -> bytes:
    try:
        return bytes.fromhex(text)
    except (TypeError, ValueError):
        raise EncodingError(f"field '{field}' is not valid hex")
