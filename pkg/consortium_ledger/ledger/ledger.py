"""
The in-memory replicated ledger of one node.

Holds the entries after the ledger start (0, or the seqno of the snapshot the
node started from), the Merkle tree over every leaf since genesis, the view
history and the positions of signature entries.
"""

import bisect
import logging
from typing import List, Optional, Sequence, Tuple

from consortium_ledger.common.exceptions import LedgerIntegrityError
from consortium_ledger.common.txid import GENESIS_PREDECESSOR, MAX_VIEW, TransactionId
from consortium_ledger.crypto.primitives import Digest
from consortium_ledger.ledger.entry import LedgerEntry
from consortium_ledger.ledger.signatures import ViewHistory
from consortium_ledger.merkle.tree import MerkleProof, MerkleState

logger = logging.getLogger("consortium_ledger.ledger")


class Ledger:
    """
    Args:
        start: Last txid covered by the snapshot this ledger starts after
        leaves: Merkle leaves for seqnos [1, start.seqno]
        view_history: View history up to start
    """

    def __init__(
        self,
        start: TransactionId = GENESIS_PREDECESSOR,
        leaves: Sequence[bytes] = (),
        view_history: Optional[ViewHistory] = None,
    ):
        if len(leaves) != start.seqno:
            raise LedgerIntegrityError(
                f"{len(leaves)} leaves for a ledger starting after {start.seqno}"
            )
        self.start = start
        self.tree = MerkleState(leaves)
        self._entries: List[LedgerEntry] = []
        self._view_history: ViewHistory = [tuple(v) for v in (view_history or [])]
        self._signatures: List[int] = []
        self.commit_seqno = start.seqno

    # -- positions ---------------------------------------------------------

    @property
    def last_seqno(self) -> int:
        return self.start.seqno + len(self._entries)

    @property
    def last_txid(self) -> TransactionId:
        return self._entries[-1].txid if self._entries else self.start

    @property
    def last_signature_txid(self) -> TransactionId:
        """Latest signature entry, or the ledger start if none is held."""
        if self._signatures:
            return self.txid_at(self._signatures[-1])
        return self.start

    @property
    def signature_seqnos(self) -> List[int]:
        return list(self._signatures)

    def __len__(self) -> int:
        return len(self._entries)

    def has(self, seqno: int) -> bool:
        return self.start.seqno < seqno <= self.last_seqno

    def entry(self, seqno: int) -> LedgerEntry:
        if not self.has(seqno):
            raise LedgerIntegrityError("no such entry in this ledger", seqno=seqno)
        return self._entries[seqno - self.start.seqno - 1]

    def entries(self, first: int, last: Optional[int] = None) -> List[LedgerEntry]:
        """Entries with seqno in [first, last]."""
        last = self.last_seqno if last is None else min(last, self.last_seqno)
        first = max(first, self.start.seqno + 1)
        if first > last:
            return []
        base = self.start.seqno + 1
        return self._entries[first - base : last - base + 1]

    def txid_at(self, seqno: int) -> TransactionId:
        if seqno == self.start.seqno:
            return self.start
        return self.entry(seqno).txid

    def view_at(self, seqno: int) -> Optional[int]:
        """View of the entry at seqno according to the view history."""
        if seqno < 1 or seqno > self.last_seqno:
            return None
        starts = [s for _, s in self._view_history]
        index = bisect.bisect_right(starts, seqno) - 1
        if index < 0:
            return None
        return self._view_history[index][0]

    @property
    def view_history(self) -> ViewHistory:
        return list(self._view_history)

    def last_signature_at_or_below(self, seqno: int) -> int:
        """Seqno of the last signature at or below seqno, else the ledger start."""
        index = bisect.bisect_right(self._signatures, seqno) - 1
        return self._signatures[index] if index >= 0 else self.start.seqno

    def first_signature_at_or_above(self, seqno: int) -> Optional[int]:
        index = bisect.bisect_left(self._signatures, seqno)
        return self._signatures[index] if index < len(self._signatures) else None

    # -- mutation ----------------------------------------------------------

    def append(self, entry: LedgerEntry) -> None:
        """
        Raises:
            LedgerIntegrityError: On a seqno gap or view regression
        """
        last = self.last_txid
        txid = entry.txid
        if txid.seqno != last.seqno + 1:
            raise LedgerIntegrityError(
                f"expected seqno {last.seqno + 1}, got {txid}", seqno=txid.seqno
            )
        if txid.view < last.view:
            raise LedgerIntegrityError(
                f"view regression from {last} to {txid}", seqno=txid.seqno
            )
        if txid.view > MAX_VIEW:
            raise LedgerIntegrityError("view exceeds nonce space", seqno=txid.seqno)
        self.tree.append(entry.leaf)
        self._entries.append(entry)
        if not self._view_history or self._view_history[-1][0] < txid.view:
            self._view_history.append((txid.view, txid.seqno))
        if entry.is_signature:
            self._signatures.append(txid.seqno)

    def truncate(self, to_seqno: int) -> List[TransactionId]:
        """
        Remove every entry above to_seqno.

        Returns:
            The removed txids, oldest first

        Raises:
            LedgerIntegrityError: If to_seqno is below the commit point
        """
        if to_seqno < self.commit_seqno:
            raise LedgerIntegrityError(
                f"truncation below commit {self.commit_seqno}", seqno=to_seqno
            )
        if to_seqno >= self.last_seqno:
            return []
        keep = to_seqno - self.start.seqno
        removed = [e.txid for e in self._entries[keep:]]
        del self._entries[keep:]
        self.tree.truncate(to_seqno)
        self._view_history = [(v, s) for v, s in self._view_history if s <= to_seqno]
        del self._signatures[bisect.bisect_right(self._signatures, to_seqno) :]
        logger.debug(f"Truncated ledger to {to_seqno}, removed {len(removed)} entries")
        return removed

    def mark_committed(self, seqno: int) -> None:
        if seqno > self.last_seqno:
            raise LedgerIntegrityError("commit beyond the end of the ledger", seqno=seqno)
        self.commit_seqno = max(self.commit_seqno, seqno)

    # -- Merkle ------------------------------------------------------------

    def root_at(self, seqno: int) -> Digest:
        return self.tree.root(seqno)

    def proof_for(self, seqno: int, signature_seqno: int) -> MerkleProof:
        return self.tree.get_proof(seqno - 1, signature_seqno)

    def leaves_upto(self, seqno: int) -> List[Digest]:
        return self.tree.leaves[:seqno]

    def frames(self) -> List[Tuple[int, bytes]]:
        return [(e.txid.seqno, e.encode()) for e in self._entries]
