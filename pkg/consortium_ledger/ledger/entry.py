"""
Ledger entries and their binary frames.

Frame layout (little-endian):

    u32 body_length
    body:
        u64 view | u64 seqno | u8 kind
        u8 has_claims | [32 claims_digest]
        bytes public_payload          (encoded public updates, plaintext)
        bytes private_payload         (AES-GCM ciphertext of private updates, or empty)
    32 entry_digest                   (hash of body)

Private payloads are encrypted with nonce = txid.nonce() and
aad = txid.encode() || kind || hash(public_payload), so a ciphertext can
neither move to another position nor be paired with other public updates.

The Merkle leaf of an entry is leaf_digest(txid, write_set_digest,
claims_digest) where write_set_digest covers kind and both payloads. For
signature entries the signatures-map update is left out of the digest: the
root a signature entry carries already covers the entry's own leaf.
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import List, Optional, Tuple

from consortium_ledger.common.encoding import (
    Reader,
    encode_bytes,
    encode_u8,
    encode_u32,
)
from consortium_ledger.common.exceptions import EncodingError, LedgerIntegrityError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.crypto.primitives import (
    DIGEST_SIZE,
    Digest,
    SymmetricSecret,
    aead_decrypt,
    aead_encrypt,
    hash_bytes,
)
from consortium_ledger.kv.maps import SIGNATURES
from consortium_ledger.kv.write_set import (
    Update,
    WriteSet,
    decode_updates,
    encode_updates,
)
from consortium_ledger.merkle.receipt import leaf_digest
from consortium_ledger.result import ErrorType, OperationError, Result


class EntryKind(IntEnum):
    USER = 0
    SIGNATURE = 1
    RECONFIGURATION = 2
    GOVERNANCE = 3
    # Node-written housekeeping: snapshot evidence, share re-issue
    INTERNAL = 4


@dataclass(frozen=True)
class LedgerEntry:
    txid: TransactionId
    kind: EntryKind
    public_payload: bytes
    private_payload: bytes = b""
    claims_digest: Optional[Digest] = None

    def body(self) -> bytes:
        parts = [self.txid.encode(), encode_u8(int(self.kind))]
        if self.claims_digest is None:
            parts.append(encode_u8(0))
        else:
            parts.append(encode_u8(1))
            parts.append(bytes(self.claims_digest))
        parts.append(encode_bytes(self.public_payload))
        parts.append(encode_bytes(self.private_payload))
        return b"".join(parts)

    @property
    def entry_digest(self) -> Digest:
        return hash_bytes(self.body())

    def encode(self) -> bytes:
        body = self.body()
        return encode_u32(len(body)) + body + hash_bytes(body)

    @property
    def is_signature(self) -> bool:
        return self.kind is EntryKind.SIGNATURE

    def public_updates(self) -> List[Update]:
        return decode_updates(self.public_payload)

    @property
    def write_set_digest(self) -> Digest:
        public = self.public_payload
        if self.is_signature:
            public = encode_updates(
                [u for u in decode_updates(public) if u.map_name != SIGNATURES]
            )
        return hash_bytes(
            encode_u8(int(self.kind))
            + encode_bytes(public)
            + encode_bytes(self.private_payload)
        )

    @property
    def leaf(self) -> Digest:
        return leaf_digest(self.txid, self.write_set_digest, self.claims_digest)

    def __repr__(self) -> str:
        return f"LedgerEntry({self.txid}, {self.kind.name})"


def _aad(txid: TransactionId, kind: EntryKind, public_payload: bytes) -> bytes:
    return txid.encode() + encode_u8(int(kind)) + hash_bytes(public_payload)


def build_entry(
    txid: TransactionId,
    kind: EntryKind,
    write_set: WriteSet,
    secret: Optional[SymmetricSecret],
    claims_digest: Optional[Digest] = None,
) -> LedgerEntry:
    """
    Serialize a write-set into an entry, encrypting private updates.

    Raises:
        LedgerIntegrityError: If there are private updates but no ledger secret
    """
    public_payload = encode_updates(write_set.public_updates)
    private = write_set.private_updates
    private_payload = b""
    if private:
        if secret is None:
            raise LedgerIntegrityError(
                "private updates need the ledger secret", seqno=txid.seqno
            )
        private_payload = aead_encrypt(
            secret,
            txid.nonce(),
            encode_updates(private),
            _aad(txid, kind, public_payload),
        )
    return LedgerEntry(txid, kind, public_payload, private_payload, claims_digest)


def open_entry(
    entry: LedgerEntry, secret: Optional[SymmetricSecret]
) -> Result[WriteSet, OperationError]:
    """
    Recover the full write-set of an entry.

    With secret=None only entries without private updates can be opened.
    """
    updates = entry.public_updates()
    if entry.private_payload:
        if secret is None:
            return Result.failure(
                OperationError(
                    ErrorType.DECRYPTION_FAILED,
                    f"entry {entry.txid} has private updates and no secret is available",
                )
            )
        plain = aead_decrypt(
            secret,
            entry.txid.nonce(),
            entry.private_payload,
            _aad(entry.txid, entry.kind, entry.public_payload),
        )
        if plain.is_failure():
            return plain
        updates += decode_updates(plain.unwrap())
    return Result.success(WriteSet(updates))


def public_write_set(entry: LedgerEntry) -> WriteSet:
    return WriteSet(entry.public_updates())


@dataclass(frozen=True)
class DecodedFrame:
    entry: LedgerEntry
    offset: int
    stored_digest: bytes

    @property
    def digest_ok(self) -> bool:
        return self.stored_digest == self.entry.entry_digest


def decode_frame(reader: Reader) -> DecodedFrame:
    """
    Decode one frame at the reader's position.

    Raises:
        EncodingError: If the frame is truncated or malformed
    """
    offset = reader.offset
    body = Reader(reader.raw(reader.u32()), 0)
    stored = reader.raw(DIGEST_SIZE)
    txid = TransactionId.decode(body)
    kind_value = body.u8()
    try:
        kind = EntryKind(kind_value)
    except ValueError:
        raise EncodingError(f"unknown entry kind {kind_value}", offset=offset)
    has_claims = body.u8()
    if has_claims not in (0, 1):
        raise EncodingError("bad claims flag", offset=offset)
    claims = Digest(body.raw(DIGEST_SIZE)) if has_claims else None
    public_payload = body.bytes_()
    private_payload = body.bytes_()
    body.expect_end()
    entry = LedgerEntry(txid, kind, public_payload, private_payload, claims)
    return DecodedFrame(entry, offset, stored)


def decode_entry(data: bytes) -> LedgerEntry:
    """
    Decode a single frame and check its digest.

    Raises:
        EncodingError: If malformed
        LedgerIntegrityError: If the stored digest does not match
    """
    reader = Reader(data)
    frame = decode_frame(reader)
    reader.expect_end()
    if not frame.digest_ok:
        raise LedgerIntegrityError("entry digest mismatch", seqno=frame.entry.txid.seqno)
    return frame.entry


def split_frames(data: bytes, start: int = 0) -> Tuple[List[DecodedFrame], Optional[EncodingError]]:
    """Decode consecutive frames until the data ends or one fails to decode."""
    reader = Reader(data, start)
    frames = []
    while not reader.at_end():
        try:
            frames.append(decode_frame(reader))
        except EncodingError as e:
            return frames, e
    return frames, None
