from enum import Enum

from consortium_ledger.common.txid import TransactionId
from consortium_ledger.ledger.ledger import Ledger


class TransactionStatus(str, Enum):
    """
    Client-visible transaction status.

    Legal transitions: Unknown -> Pending -> Committed | Invalid, and
    Unknown -> Committed | Invalid. Committed and Invalid are final.
    """

    UNKNOWN = "Unknown"
    PENDING = "Pending"
    COMMITTED = "Committed"
    INVALID = "Invalid"

    @property
    def is_final(self) -> bool:
        return self in (TransactionStatus.COMMITTED, TransactionStatus.INVALID)


def evaluate_status(ledger: Ledger, txid: TransactionId) -> TransactionStatus:
    """
    Status of txid as seen by a node holding `ledger`.

    Committed when txid is at or below the commit point and the view history
    places txid's view at that seqno. Invalid when the commit point covers
    the seqno under another view, or when a later view was already committed
    from a smaller seqno. Pending when the node holds the entry uncommitted.
    """
    commit = ledger.commit_seqno
    if txid.seqno < 1 or txid.view < 1:
        return TransactionStatus.UNKNOWN

    if txid.seqno <= commit:
        local_view = ledger.view_at(txid.seqno)
        if local_view is None:
            return TransactionStatus.UNKNOWN
        if local_view == txid.view:
            return TransactionStatus.COMMITTED
        return TransactionStatus.INVALID

    committed_view = ledger.view_at(commit) if commit > 0 else None
    if committed_view is not None and committed_view > txid.view:
        return TransactionStatus.INVALID

    if ledger.has(txid.seqno) and ledger.view_at(txid.seqno) == txid.view:
        return TransactionStatus.PENDING

    return TransactionStatus.UNKNOWN
