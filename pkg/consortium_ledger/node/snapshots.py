"""
Snapshot bookkeeping on a node.

Every node that applies a snapshot evidence entry at seqno e serializes its
store as of e - 1 and keeps the result if its digest equals the evidence's
claims digest. Once e is committed the snapshot is finalized with the
receipt for the evidence entry and becomes the one served to joiners.
"""

import logging
from typing import Callable, Dict, Optional, Tuple

from consortium_ledger.common.exceptions import SnapshotError
from consortium_ledger.crypto.primitives import SymmetricSecret
from consortium_ledger.kv.snapshot import Snapshot, take_snapshot
from consortium_ledger.kv.store import StoreState
from consortium_ledger.ledger.entry import LedgerEntry
from consortium_ledger.ledger.ledger import Ledger
from consortium_ledger.merkle.receipt import Receipt
from consortium_ledger.result import OperationError, Result

logger = logging.getLogger("consortium_ledger.node.snapshots")


class SnapshotManager:
    def __init__(self, node_id: str):
        self.node_id = node_id
        self.pending: Dict[int, Snapshot] = {}
        self.latest: Optional[Snapshot] = None
        self.last_evidence_seqno = 0
        self._prepared: Optional[Snapshot] = None

    def prepare(
        self, store: StoreState, ledger: Ledger, secret: Optional[SymmetricSecret]
    ) -> Optional[Snapshot]:
        """Serialize the store at the ledger's last seqno, ahead of writing evidence."""
        seqno = ledger.last_seqno
        try:
            snapshot = take_snapshot(
                store,
                ledger.leaves_upto(seqno),
                [v for v in ledger.view_history if v[1] <= seqno],
                secret,
            )
        except SnapshotError as e:
            logger.debug(f"{self.node_id} cannot snapshot at {seqno}: {e.message}")
            return None
        self._prepared = snapshot
        return snapshot

    def capture(
        self,
        store: StoreState,
        ledger: Ledger,
        secret: Optional[SymmetricSecret],
        evidence: LedgerEntry,
    ) -> None:
        """Called before the evidence entry is applied to the store."""
        seqno = evidence.txid.seqno
        prepared = self._prepared
        self._prepared = None
        if prepared is not None and prepared.seqno == seqno - 1:
            snapshot = prepared
        else:
            try:
                snapshot = take_snapshot(
                    store,
                    ledger.leaves_upto(seqno - 1),
                    [v for v in ledger.view_history if v[1] <= seqno - 1],
                    secret,
                )
            except SnapshotError as e:
                logger.debug(f"{self.node_id} skips snapshot at {seqno - 1}: {e.message}")
                return
        if snapshot.digest != evidence.claims_digest:
            logger.warning(f"{self.node_id}: snapshot at {seqno - 1} does not match its evidence")
            return
        self.pending[seqno] = snapshot
        self.last_evidence_seqno = seqno

    def rollback(self, seqno: int) -> None:
        for evidence_seqno in [e for e in self.pending if e > seqno]:
            del self.pending[evidence_seqno]
        if self.last_evidence_seqno > seqno:
            self.last_evidence_seqno = max(self.pending, default=0)

    def finalize(
        self,
        commit_seqno: int,
        receipt_for: Callable[[int], Result[Receipt, OperationError]],
    ) -> None:
        for evidence_seqno in sorted(self.pending):
            if evidence_seqno > commit_seqno:
                break
            snapshot = self.pending.pop(evidence_seqno)
            receipt = receipt_for(evidence_seqno)
            if receipt.is_failure():
                logger.warning(f"{self.node_id}: no receipt for evidence {evidence_seqno}: {receipt.error()}")
                continue
            snapshot.receipt = receipt.unwrap()
            self.latest = snapshot
            logger.debug(f"{self.node_id} finalized snapshot at {snapshot.seqno}")

    def adopt(self, snapshot: Snapshot) -> None:
        self.pending = {}
        self.latest = snapshot
        self.last_evidence_seqno = snapshot.seqno + 1

    def latest_bytes(self) -> Optional[Tuple[int, bytes]]:
        if self.latest is None or not self.latest.is_finalized:
            return None
        return self.latest.seqno, self.latest.to_bytes()
