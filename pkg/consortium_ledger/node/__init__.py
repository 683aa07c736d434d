from consortium_ledger.node.node import (
    DEFAULT_CODE_ID,
    GOVERNANCE_ENDPOINT,
    RECEIPT_ENDPOINT,
    TX_STATUS_ENDPOINT,
    ClientReply,
    NodeCore,
)
from consortium_ledger.node.receipts import build_receipt
from consortium_ledger.node.snapshots import SnapshotManager

__all__ = [
    "ClientReply",
    "DEFAULT_CODE_ID",
    "GOVERNANCE_ENDPOINT",
    "NodeCore",
    "RECEIPT_ENDPOINT",
    "SnapshotManager",
    "TX_STATUS_ENDPOINT",
    "build_receipt",
]
