"""
Store snapshots.

A snapshot captures the store at some seqno s together with the Merkle
leaves [1, s] and the view history, so a node can start from it and keep
computing roots. Serialized layout:

    8   magic "CSNAPSH\\0"
    u32 format version
    str algorithm suite
    16  txid
    bytes view history (canonical JSON)
    bytes public maps (encoded updates, plaintext)
    bytes private maps (AES-GCM under the snapshot key, empty if none)
    u32 leaf count, leaves
    ---- the snapshot digest covers everything above ----
    bytes evidence receipt (receipt text, empty until finalized)

The primary records the snapshot digest as the claims digest of an evidence
entry at s + 1. Once a later signature commits that entry, the receipt for it
is attached; restoring checks the receipt against the service identity and
the claims digest against the snapshot body.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from consortium_ledger.common.encoding import (
    Reader,
    canonical_json,
    encode_bytes,
    encode_str,
    encode_u32,
    parse_json,
)
from consortium_ledger.common.exceptions import ConsortiumLedgerError, SnapshotError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.crypto.primitives import (
    ALGORITHM_SUITE,
    DIGEST_SIZE,
    Digest,
    SymmetricSecret,
    aead_decrypt,
    aead_encrypt,
    hash_bytes,
)
from consortium_ledger.kv.maps import MapName
from consortium_ledger.kv.store import StoreState
from consortium_ledger.kv.write_set import Update, decode_updates, encode_updates
from consortium_ledger.merkle.receipt import Receipt, verify_receipt

logger = logging.getLogger("consortium_ledger.kv.snapshot")

SNAPSHOT_MAGIC = b"CSNAPSH\x00"
SNAPSHOT_VERSION = 1
SNAPSHOT_KEY_LABEL = b"snapshot"


def _updates_of(maps: Dict[MapName, Dict[bytes, bytes]], public: bool) -> List[Update]:
    return [
        Update(name, key, value)
        for name, contents in maps.items()
        if name.is_public == public
        for key, value in contents.items()
    ]


@dataclass
class Snapshot:
    txid: TransactionId
    body: bytes
    receipt: Optional[Receipt] = None

    @property
    def seqno(self) -> int:
        return self.txid.seqno

    @property
    def digest(self) -> Digest:
        return hash_bytes(self.body)

    @property
    def is_finalized(self) -> bool:
        return self.receipt is not None

    def to_bytes(self) -> bytes:
        receipt = self.receipt.to_text().encode("utf-8") if self.receipt else b""
        return self.body + encode_bytes(receipt)


@dataclass
class RestoredSnapshot:
    """Decoded snapshot. private_ciphertext is kept when no secret was given."""

    txid: TransactionId
    store: StoreState
    leaves: List[Digest]
    view_history: List[tuple]
    private_ciphertext: bytes = b""
    receipt: Optional[Receipt] = None
    header: bytes = field(default=b"", repr=False)
    body: bytes = field(default=b"", repr=False)

    def as_snapshot(self) -> Snapshot:
        return Snapshot(self.txid, self.body, self.receipt)


def take_snapshot(
    store: StoreState,
    leaves: List[bytes],
    view_history: List[tuple],
    secret: Optional[SymmetricSecret],
) -> Snapshot:
    """
    Serialize the store at its applied version.

    Raises:
        SnapshotError: If private maps exist but no secret is given, or the
            leaf count does not match the applied seqno
    """
    txid = store.applied_upto
    if len(leaves) != txid.seqno:
        raise SnapshotError(f"{len(leaves)} leaves for a snapshot at {txid}")
    maps = store.export()
    header = (
        SNAPSHOT_MAGIC
        + encode_u32(SNAPSHOT_VERSION)
        + encode_str(ALGORITHM_SUITE)
        + txid.encode()
    )
    private = _updates_of(maps, public=False)
    private_payload = b""
    if private:
        if secret is None:
            raise SnapshotError("private maps need the ledger secret")
        private_payload = aead_encrypt(
            secret.derive(SNAPSHOT_KEY_LABEL), txid.nonce(), encode_updates(private), header
        )
    body = (
        header
        + encode_bytes(canonical_json([list(v) for v in view_history]))
        + encode_bytes(encode_updates(_updates_of(maps, public=True)))
        + encode_bytes(private_payload)
        + encode_u32(len(leaves))
        + b"".join(bytes(leaf) for leaf in leaves)
    )
    return Snapshot(txid, body)


def _decode(data: bytes):
    reader = Reader(data)
    if reader.raw(len(SNAPSHOT_MAGIC)) != SNAPSHOT_MAGIC:
        raise SnapshotError("not a snapshot")
    version = reader.u32()
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    suite = reader.str_()
    if suite != ALGORITHM_SUITE:
        raise SnapshotError(f"unsupported algorithm suite {suite}")
    txid = TransactionId.decode(reader)
    header_end = reader.offset
    view_history = [tuple(v) for v in parse_json(reader.bytes_())]
    public = decode_updates(reader.bytes_())
    private_payload = reader.bytes_()
    leaves = [Digest(reader.raw(DIGEST_SIZE)) for _ in range(reader.u32())]
    body_end = reader.offset
    receipt_text = reader.bytes_()
    reader.expect_end()
    return (
        txid,
        data[:header_end],
        data[:body_end],
        view_history,
        public,
        private_payload,
        leaves,
        receipt_text,
    )


def restore_snapshot(
    data: bytes,
    secret: Optional[SymmetricSecret],
    service_public_id: Optional[bytes],
) -> RestoredSnapshot:
    """
    Decode and verify a snapshot.

    Snapshots above seqno 0 must carry an evidence receipt that verifies
    against service_public_id and whose claims digest is the snapshot digest.

    Raises:
        SnapshotError: On malformed input, a missing or invalid receipt, or a
            private payload that does not decrypt
    """
    try:
        (txid, header, body, view_history, public, private_payload, leaves, receipt_text) = _decode(data)
    except SnapshotError:
        raise
    except ConsortiumLedgerError as e:
        raise SnapshotError(f"malformed snapshot: {e.message}")
    except (TypeError, ValueError) as e:
        raise SnapshotError(f"malformed snapshot: {e}")

    if len(leaves) != txid.seqno:
        raise SnapshotError(f"{len(leaves)} leaves for a snapshot at {txid}")

    receipt = None
    if txid.seqno > 0:
        if not receipt_text:
            raise SnapshotError("snapshot has no evidence receipt")
        try:
            receipt = Receipt.from_text(receipt_text.decode("utf-8"))
        except (ConsortiumLedgerError, UnicodeDecodeError) as e:
            raise SnapshotError(f"unreadable evidence receipt: {e}")
        if service_public_id is None or not verify_receipt(receipt, service_public_id):
            raise SnapshotError("evidence receipt does not verify")
        if receipt.claims_digest != hash_bytes(body):
            raise SnapshotError("snapshot contents do not match the evidence")
        if receipt.txid.seqno != txid.seqno + 1:
            raise SnapshotError("evidence does not directly follow the snapshot")

    store = StoreState(applied_upto=txid)
    store.load(public)
    restored = RestoredSnapshot(
        txid, store, leaves, view_history, private_payload, receipt, header, body
    )
    if secret is not None:
        open_private(restored, secret)
    return restored


def open_private(restored: RestoredSnapshot, secret: SymmetricSecret) -> None:
    """
    Decrypt the private maps of a restored snapshot into its store.

    Raises:
        SnapshotError: If decryption fails
    """
    if not restored.private_ciphertext:
        return
    plain = aead_decrypt(
        secret.derive(SNAPSHOT_KEY_LABEL),
        restored.txid.nonce(),
        restored.private_ciphertext,
        restored.header,
    )
    if plain.is_failure():
        raise SnapshotError("private snapshot payload does not decrypt")
    restored.store.load(decode_updates(plain.unwrap()))
    restored.private_ciphertext = b""
