"""
Disaster recovery from ledger files.

A recovery node verifies the files it is given, replays the public state up
to the last verified signature and starts a new service under a fresh
identity. Private state stays sealed until members have approved the
recovery and submitted enough recovery shares.
"""

import logging
import random
from pathlib import Path
from typing import List, Optional, Union

from consortium_ledger.common.exceptions import RecoveryError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.consensus.configurations import ActiveConfigurations
from consortium_ledger.crypto.primitives import KeyPair, sign
from consortium_ledger.crypto.shamir import SecretShare
from consortium_ledger.governance.model import MemberIdentity, RequestKind, SignedRequest
from consortium_ledger.kv.endpoints import Application
from consortium_ledger.kv.records import (
    NodeInfo,
    NodeStatus,
    ServiceInfo,
    ServiceStatus,
    read_nodes,
    read_service,
    write_node,
    write_service,
)
from consortium_ledger.kv.transaction import Tx
from consortium_ledger.ledger.audit import audit_chunks
from consortium_ledger.ledger.chunks import ChunkFile, read_ledger_files
from consortium_ledger.ledger.entry import EntryKind, LedgerEntry, build_entry, public_write_set
from consortium_ledger.merkle.receipt import endorsement_message
from consortium_ledger.node.node import DEFAULT_CODE_ID, NodeCore
from consortium_ledger.recovery.session import RecoverySession, share_body

logger = logging.getLogger("consortium_ledger.recovery")


def recoverable_entries(chunks: List[ChunkFile], committed_only: bool = False) -> List[LedgerEntry]:
    """
    Entries up to the last signature that verifies.

    Args:
        chunks: Parsed ledger files
        committed_only: Stop at the last verified signature the files mark
            as committed, instead of the last verified one

    Raises:
        RecoveryError: If no signature verifies
    """
    report = audit_chunks(chunks, b"")
    seqnos = [TransactionId.parse(s.txid).seqno for s in report.signatures]
    if committed_only:
        limit = max((c.header.committed_upto for c in chunks if c.header), default=0)
        seqnos = [s for s in seqnos if s <= limit]
    if not seqnos:
        raise RecoveryError("ledger files hold no verifiable signature")
    last = seqnos[-1]
    entries = [frame.entry for chunk in chunks for frame in chunk.frames]
    return [e for e in entries if e.txid.seqno <= last]


def highest_view(chunks: List[ChunkFile]) -> int:
    """Highest view of any frame in the files, verified or not."""
    return max((frame.entry.txid.view for chunk in chunks for frame in chunk.frames), default=0)


def start_recovery(
    source: Union[str, Path, List[LedgerEntry]],
    node_id: str,
    config: AppConfig,
    rng: random.Random,
    committed_only: bool = False,
    seen_view: int = 0,
    app: Optional[Application] = None,
    now: float = 0.0,
) -> NodeCore:
    """
    Start a recovery service from ledger files (or already verified entries).

    The returned node is primary of a one-node service in status Recovering.
    Every node of the previous service is marked RETIRED.

    Args:
        seen_view: Highest view found anywhere in the files, including
            frames past the recovered prefix; computed here when reading files

    Raises:
        RecoveryError: If nothing verifiable is found
    """
    if isinstance(source, (str, Path)):
        chunks = read_ledger_files(source)
        entries = recoverable_entries(chunks, committed_only)
        seen_view = max(seen_view, highest_view(chunks))
    else:
        entries = list(source)
    if not entries:
        raise RecoveryError("nothing to recover")

    node = NodeCore(node_id, KeyPair.generate(rng), config, rng, app=app, now=now)
    for entry in entries:
        node.ledger.append(entry)
        node.store.apply(entry.txid, public_write_set(entry))
    last = entries[-1].txid
    node.ledger.mark_committed(last.seqno)
    node.store.compact(last.seqno)

    previous = read_service(node.store)
    if previous is None:
        raise RecoveryError("recovered ledger names no service")
    node.service_key = KeyPair.generate(rng)
    node.recovery = RecoverySession(last.seqno, previous.identity)

    # Nonces are derived from (view, seqno) under the same ledger secret, so
    # the new view must be above every view the old files ever used.
    view = max(seen_view, max(e.txid.view for e in entries)) + 1
    node.consensus.configurations = ActiveConfigurations(committed_seqno=last.seqno)
    node.consensus.bootstrap_primary(view)

    tx = Tx(node.store, privileged=True)
    for old_id, info in read_nodes(tx).items():
        if info.status is not NodeStatus.RETIRED:
            write_node(tx, old_id, info.with_status(NodeStatus.RETIRED))
    write_node(
        tx,
        node_id,
        NodeInfo(
            NodeStatus.TRUSTED,
            node.identity.public_id,
            DEFAULT_CODE_ID,
            sign(node.service_key, endorsement_message(node.identity.public_id)),
        ),
    )
    write_service(
        tx, ServiceInfo(ServiceStatus.RECOVERING, node.service_key.public_id, previous.identity)
    )
    txid = node.consensus.next_txid()
    node.consensus.append_local(
        build_entry(txid, EntryKind.RECONFIGURATION, tx.write_set, None), tx.write_set
    )
    node.emit_signature()
    logger.info(
        f"{node_id} recovered {last.seqno} entries; new service starts at view {view}"
    )
    node.events.append(
        {"type": "recovery-started", "node": node_id, "time": now, "seqno": last.seqno, "view": view}
    )
    return node


def share_request(member: MemberIdentity, share: SecretShare) -> SignedRequest:
    """A member's signed recovery share submission."""
    return SignedRequest.create(member, RequestKind.RECOVERY_SHARE, share_body(share))


def submit_recovery_share(node: NodeCore, member: MemberIdentity, share: SecretShare):
    """Hand one decrypted share to a recovering node."""
    return node.submit_recovery_share(share_request(member, share))
