"""
Signature transactions.

A signature entry at seqno s carries, in public:ccf.internal.signatures, the
Merkle root over leaves [1, s]: the s-1 earlier leaves plus the entry's own
leaf, which is computed with the signatures update left out (sign, then
absorb). Any extra public updates (the genesis configuration, for instance)
are covered by that leaf.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

from consortium_ledger.common.encoding import canonical_json, from_hex, parse_json
from consortium_ledger.common.exceptions import EncodingError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.crypto.primitives import Digest, KeyPair, sign, verify
from consortium_ledger.kv.maps import SIGNATURE_KEY, SIGNATURES
from consortium_ledger.kv.write_set import WriteSet
from consortium_ledger.ledger.entry import EntryKind, LedgerEntry, build_entry
from consortium_ledger.merkle.tree import MerkleState

ViewHistory = List[Tuple[int, int]]


@dataclass(frozen=True)
class SignaturePayload:
    merkle_root: Digest
    root_signature: bytes
    signing_node: str
    signing_public_id: bytes
    view_history: Tuple[Tuple[int, int], ...]

    def to_bytes(self) -> bytes:
        return canonical_json(
            {
                "merkle_root": self.merkle_root.hex(),
                "root_signature": self.root_signature.hex(),
                "signing_node": self.signing_node,
                "signing_public_id": self.signing_public_id.hex(),
                "view_history": [list(v) for v in self.view_history],
            }
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SignaturePayload":
        doc = parse_json(data)
        try:
            return cls(
                merkle_root=Digest(from_hex(doc["merkle_root"], "merkle_root")),
                root_signature=from_hex(doc["root_signature"], "root_signature"),
                signing_node=str(doc["signing_node"]),
                signing_public_id=from_hex(doc["signing_public_id"], "signing_public_id"),
                view_history=tuple((int(v), int(s)) for v, s in doc["view_history"]),
            )
        except EncodingError:
            raise
        except Exception as e:
            raise EncodingError(f"malformed signature payload: {e}")

    def verify(self) -> bool:
        return verify(self.signing_public_id, self.merkle_root, self.root_signature)


def make_signature_entry(
    txid: TransactionId,
    tree: MerkleState,
    key: KeyPair,
    node_id: str,
    view_history: ViewHistory,
    extra: Optional[WriteSet] = None,
) -> Tuple[LedgerEntry, SignaturePayload]:
    """
    Build the signature entry for position txid.

    Args:
        txid: Position of the new entry; tree must hold leaves [1, txid.seqno - 1]
        tree: Merkle tree of the ledger so far (not modified)
        key: Signing node's identity
        node_id: Signing node's id
        view_history: (view, first seqno) pairs up to and including txid's view
        extra: Additional public updates carried by the entry
    """
    base = WriteSet(extra.updates() if extra else ())
    unsigned = build_entry(txid, EntryKind.SIGNATURE, base, None)
    root = tree.root_with(unsigned.leaf)
    payload = SignaturePayload(
        merkle_root=root,
        root_signature=sign(key, root),
        signing_node=node_id,
        signing_public_id=key.public_id,
        view_history=tuple(tuple(v) for v in view_history),
    )
    base.put(SIGNATURES, SIGNATURE_KEY, payload.to_bytes())
    return build_entry(txid, EntryKind.SIGNATURE, base, None), payload


def signature_payload(entry: LedgerEntry) -> SignaturePayload:
    """
    Raises:
        EncodingError: If the entry carries no well-formed signature payload
    """
    for update in entry.public_updates():
        if update.map_name == SIGNATURES and update.key == SIGNATURE_KEY:
            if update.value is None:
                break
            return SignaturePayload.from_bytes(update.value)
    raise EncodingError(f"entry {entry.txid} has no signature payload")
