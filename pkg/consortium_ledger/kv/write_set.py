"""
Write-sets: the atomic unit of change produced by one transaction.

Each update either puts a value or removes a key. At most one update per
(map, key) survives; a later write in the same transaction replaces the
earlier one.

Binary encoding of an update list (used for ledger payloads):

    u32 count, then per update: str map | bytes key | u8 present | [bytes value]

Updates are encoded in (map, key) order so equal write-sets encode equally
regardless of the order the endpoint performed them in.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from consortium_ledger.common.encoding import (
    Reader,
    encode_bytes,
    encode_str,
    encode_u8,
    encode_u32,
)
from consortium_ledger.kv.maps import MapName


@dataclass(frozen=True)
class Update:
    map_name: MapName
    key: bytes
    value: Optional[bytes]

    @property
    def is_remove(self) -> bool:
        return self.value is None


class WriteSet:
    def __init__(self, updates: Iterable[Update] = ()):
        self._updates: Dict[Tuple[str, bytes], Optional[bytes]] = {}
        for update in updates:
            self._updates[(update.map_name, update.key)] = update.value

    def put(self, map_name: str, key: bytes, value: bytes) -> None:
        self._updates[(MapName(map_name), bytes(key))] = bytes(value)

    def remove(self, map_name: str, key: bytes) -> None:
        self._updates[(MapName(map_name), bytes(key))] = None

    def lookup(self, map_name: str, key: bytes) -> Tuple[bool, Optional[bytes]]:
        """(written, value) for a key; value None with written=True is a removal."""
        slot = (map_name, bytes(key))
        if slot in self._updates:
            return True, self._updates[slot]
        return False, None

    def updates(self) -> List[Update]:
        return [
            Update(MapName(m), k, v) for (m, k), v in sorted(self._updates.items())
        ]

    def __iter__(self) -> Iterator[Update]:
        return iter(self.updates())

    def __len__(self) -> int:
        return len(self._updates)

    def __bool__(self) -> bool:
        return bool(self._updates)

    def __eq__(self, other) -> bool:
        return isinstance(other, WriteSet) and self.updates() == other.updates()

    def __repr__(self) -> str:
        return f"WriteSet({len(self)} updates)"

    @property
    def public_updates(self) -> List[Update]:
        return [u for u in self.updates() if u.map_name.is_public]

    @property
    def private_updates(self) -> List[Update]:
        return [u for u in self.updates() if not u.map_name.is_public]

    def touches(self, map_name: str) -> bool:
        return any(m == map_name for m, _ in self._updates)

    def merge(self, other: "WriteSet") -> None:
        """Overlay other's updates onto this write-set."""
        for update in other.updates():
            self._updates[(update.map_name, update.key)] = update.value

    def without(self, map_name: str) -> "WriteSet":
        return WriteSet(u for u in self.updates() if u.map_name != map_name)


def encode_updates(updates: List[Update]) -> bytes:
    parts = [encode_u32(len(updates))]
    for update in sorted(updates, key=lambda u: (u.map_name, u.key)):
        parts.append(encode_str(update.map_name))
        parts.append(encode_bytes(update.key))
        if update.value is None:
            parts.append(encode_u8(0))
        else:
            parts.append(encode_u8(1))
            parts.append(encode_bytes(update.value))
    return b"".join(parts)


def decode_updates(data: bytes) -> List[Update]:
    """
    Raises:
        EncodingError: If the payload is malformed
    """
    reader = Reader(data)
    updates = []
    for _ in range(reader.u32()):
        map_name = MapName(reader.str_())
        key = reader.bytes_()
        present = reader.u8()
        updates.append(Update(map_name, key, reader.bytes_() if present else None))
    reader.expect_end()
    return updates
