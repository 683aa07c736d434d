import logging
from typing import Iterator, Optional, Tuple

from consortium_ledger.common.exceptions import AccessDeniedError
from consortium_ledger.kv.maps import MapName
from consortium_ledger.kv.store import StoreState
from consortium_ledger.kv.write_set import WriteSet

logger = logging.getLogger("consortium_ledger.kv")


class Tx:
    """
    A transaction over the store's latest applied version.

    Reads see the transaction's own writes first. Nothing reaches the store
    until the resulting write-set is applied through the ledger.

    Args:
        store: Store (or parent transaction) to read through to
        privileged: Allow writes to governance and internal maps
    """

    def __init__(self, store, privileged: bool = False):
        self._base = store
        self.privileged = privileged
        self.write_set = WriteSet()
        self.read_version = (
            store.applied_upto if isinstance(store, StoreState) else store.read_version
        )

    def get(self, map_name: str, key: bytes) -> Optional[bytes]:
        written, value = self.write_set.lookup(map_name, key)
        if written:
            return value
        return self._base.get(map_name, key)

    def items(self, map_name: str) -> Iterator[Tuple[bytes, bytes]]:
        merged = dict(self._base.items(map_name))
        for update in self.write_set.updates():
            if update.map_name != map_name:
                continue
            if update.value is None:
                merged.pop(update.key, None)
            else:
                merged[update.key] = update.value
        for key in sorted(merged):
            yield key, merged[key]

    def _check_writable(self, map_name: str) -> MapName:
        name = MapName(map_name)
        if name.is_reserved and not self.privileged:
            raise AccessDeniedError("application logic cannot write this map", name)
        return name

    def put(self, map_name: str, key: bytes, value: bytes) -> None:
        self.write_set.put(self._check_writable(map_name), key, value)

    def remove(self, map_name: str, key: bytes) -> None:
        self.write_set.remove(self._check_writable(map_name), key)

    @property
    def is_read_only(self) -> bool:
        return not self.write_set

    def nested(self) -> "Tx":
        """Child transaction whose writes reach this one only via merge_child."""
        return Tx(self, privileged=self.privileged)

    def merge_child(self, child: "Tx") -> None:
        self.write_set.merge(child.write_set)
