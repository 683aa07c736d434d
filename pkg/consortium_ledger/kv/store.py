"""
In-memory versioned key-value store.

The store is the fold of every applied write-set. Each applied seqno above
the commit point keeps an undo record (the previous values of the keys it
touched), so the store can roll back in lockstep with ledger truncation but
never below the commit point.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from consortium_ledger.common.exceptions import (
    CommittedRollbackError,
    SequencingError,
)
from consortium_ledger.common.txid import GENESIS_PREDECESSOR, TransactionId
from consortium_ledger.kv.maps import MapName
from consortium_ledger.kv.write_set import Update, WriteSet

logger = logging.getLogger("consortium_ledger.kv")


@dataclass
class _UndoRecord:
    previous_applied: TransactionId
    previous_values: List[Tuple[MapName, bytes, Optional[bytes]]]


class StoreState:
    """
    Single-writer store owned by a node's event loop.

    Args:
        maps: Initial contents, e.g. from a snapshot
        applied_upto: TransactionId of the last entry folded into maps
    """

    def __init__(
        self,
        maps: Optional[Dict[str, Dict[bytes, bytes]]] = None,
        applied_upto: TransactionId = GENESIS_PREDECESSOR,
    ):
        self._maps: Dict[MapName, Dict[bytes, bytes]] = {
            MapName(name): dict(contents) for name, contents in (maps or {}).items()
        }
        self.applied_upto = applied_upto
        self.commit_seqno = applied_upto.seqno
        self._undo: Dict[int, _UndoRecord] = {}

    def get(self, map_name: str, key: bytes) -> Optional[bytes]:
        return self._maps.get(MapName(map_name), {}).get(bytes(key))

    def items(self, map_name: str) -> Iterator[Tuple[bytes, bytes]]:
        """Key order is sorted so iteration is deterministic."""
        contents = self._maps.get(MapName(map_name), {})
        for key in sorted(contents):
            yield key, contents[key]

    def map_names(self) -> List[MapName]:
        return sorted(name for name, contents in self._maps.items() if contents)

    def export(self) -> Dict[MapName, Dict[bytes, bytes]]:
        """Deep copy of all non-empty maps."""
        return {name: dict(self._maps[name]) for name in self.map_names()}

    def apply(self, txid: TransactionId, write_set: WriteSet) -> None:
        """
        Apply a write-set as the next transaction.

        Raises:
            SequencingError: If txid does not directly follow applied_upto
        """
        if txid.seqno != self.applied_upto.seqno + 1:
            raise SequencingError(
                f"cannot apply {txid} after {self.applied_upto}"
            )
        if txid.view < self.applied_upto.view:
            raise SequencingError(f"view regression applying {txid}")
        self.apply_updates(txid, write_set.updates())

    def apply_updates(self, txid: TransactionId, updates: List[Update]) -> None:
        previous = []
        for update in updates:
            contents = self._maps.setdefault(update.map_name, {})
            previous.append((update.map_name, update.key, contents.get(update.key)))
            if update.value is None:
                contents.pop(update.key, None)
            else:
                contents[update.key] = update.value
        self._undo[txid.seqno] = _UndoRecord(self.applied_upto, previous)
        self.applied_upto = txid

    def load(self, updates: List[Update]) -> None:
        """Write updates into the base state without an undo record."""
        for update in updates:
            contents = self._maps.setdefault(update.map_name, {})
            if update.value is None:
                contents.pop(update.key, None)
            else:
                contents[update.key] = update.value

    def rollback_to(self, seqno: int) -> None:
        """
        Undo every transaction above seqno.

        Raises:
            CommittedRollbackError: If seqno is below the commit point
        """
        if seqno < self.commit_seqno:
            raise CommittedRollbackError(
                f"rollback to {seqno} below commit {self.commit_seqno}"
            )
        while self.applied_upto.seqno > seqno:
            record = self._undo.pop(self.applied_upto.seqno)
            for map_name, key, value in reversed(record.previous_values):
                contents = self._maps.setdefault(map_name, {})
                if value is None:
                    contents.pop(key, None)
                else:
                    contents[key] = value
            self.applied_upto = record.previous_applied

    def compact(self, commit_seqno: int) -> None:
        """Advance the commit point and drop undo records at or below it."""
        if commit_seqno <= self.commit_seqno:
            return
        self.commit_seqno = min(commit_seqno, self.applied_upto.seqno)
        for seqno in [s for s in self._undo if s <= self.commit_seqno]:
            del self._undo[seqno]

    @property
    def undo_depth(self) -> int:
        return len(self._undo)

    def copy(self) -> "StoreState":
        """Independent store with the same contents and version (no undo history)."""
        clone = StoreState(self.export(), self.applied_upto)
        clone.commit_seqno = self.applied_upto.seqno
        return clone

    def same_contents(self, other: "StoreState") -> bool:
        return self.export() == other.export()
