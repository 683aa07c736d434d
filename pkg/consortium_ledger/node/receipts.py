"""
Receipts for committed transactions.
"""

from consortium_ledger.common.exceptions import ConsortiumLedgerError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.kv.records import read_node
from consortium_ledger.ledger.ledger import Ledger
from consortium_ledger.ledger.signatures import signature_payload
from consortium_ledger.ledger.status import TransactionStatus, evaluate_status
from consortium_ledger.merkle.receipt import Receipt
from consortium_ledger.result import ErrorType, OperationError, Result


def _fail(message: str) -> Result[Receipt, OperationError]:
    return Result.failure(OperationError(ErrorType.INVALID_ARGUMENT, message))


def build_receipt(ledger: Ledger, store, txid: TransactionId) -> Result[Receipt, OperationError]:
    """
    Receipt for txid against the first committed signature that covers it.

    Fails unless txid is Committed and its entry is held by this ledger (not
    folded into the snapshot the ledger started from).
    """
    status = evaluate_status(ledger, txid)
    if status is not TransactionStatus.COMMITTED:
        return _fail(f"{txid} is {status.value}")
    if not ledger.has(txid.seqno):
        return _fail(f"{txid} is older than this node's ledger")
    signature_seqno = ledger.first_signature_at_or_above(txid.seqno)
    if signature_seqno is None or signature_seqno > ledger.commit_seqno:
        return _fail(f"no committed signature covers {txid}")

    entry = ledger.entry(txid.seqno)
    signature_entry = ledger.entry(signature_seqno)
    try:
        payload = signature_payload(signature_entry)
        signer = read_node(store, payload.signing_node)
    except ConsortiumLedgerError as e:
        return Result.failure(OperationError.from_exception(e))
    if signer is None:
        return _fail(f"signing node {payload.signing_node} is unknown")

    return Result.success(
        Receipt(
            txid=txid,
            write_set_digest=entry.write_set_digest,
            claims_digest=entry.claims_digest,
            proof=ledger.proof_for(txid.seqno, signature_seqno),
            root=payload.merkle_root,
            signature=payload.root_signature,
            node_public_id=payload.signing_public_id,
            node_endorsement=signer.endorsement,
            signature_txid=signature_entry.txid,
        )
    )
