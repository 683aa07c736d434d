"""
Leaf digests and offline-verifiable receipts.

A leaf commits to hash(txid.encode() || write_set_digest || claims_digest),
where a missing claims digest is encoded as 32 zero bytes. A receipt carries
everything needed to re-derive that leaf, fold it to a signed root and check
the signer's endorsement by the service identity.

Text form (field order is fixed, bytes are lowercase hex):

    {"txid": "2.7", "write_set_digest": ..., "claims_digest": ... | null,
     "proof": [["right", <hex>], ...], "root": ..., "signature": ...,
     "node_public_id": ..., "node_endorsement": ..., "signature_txid": "2.9"}
"""

import json
from dataclasses import dataclass
from typing import Optional

from consortium_ledger.common.encoding import from_hex
from consortium_ledger.common.exceptions import EncodingError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.crypto.primitives import (
    ZERO_DIGEST,
    Digest,
    hash_bytes,
    verify,
)
from consortium_ledger.merkle.tree import MerkleProof, Side, verify_proof

RECEIPT_FIELDS = (
    "txid",
    "write_set_digest",
    "claims_digest",
    "proof",
    "root",
    "signature",
    "node_public_id",
    "node_endorsement",
    "signature_txid",
)


def leaf_digest(
    txid: TransactionId, write_set_digest: bytes, claims_digest: Optional[bytes]
) -> Digest:
    claims = ZERO_DIGEST if claims_digest is None else Digest(bytes(claims_digest))
    return hash_bytes(txid.encode() + Digest(bytes(write_set_digest)) + claims)


def endorsement_message(node_public_id: bytes) -> bytes:
    """What the service identity signs to endorse a node."""
    return b"node-endorsement:" + bytes(node_public_id)


@dataclass(frozen=True)
class Receipt:
    txid: TransactionId
    write_set_digest: Digest
    claims_digest: Optional[Digest]
    proof: MerkleProof
    root: Digest
    signature: bytes
    node_public_id: bytes
    node_endorsement: bytes
    signature_txid: TransactionId

    @property
    def leaf(self) -> Digest:
        return leaf_digest(self.txid, self.write_set_digest, self.claims_digest)

    def to_dict(self) -> dict:
        return {
            "txid": str(self.txid),
            "write_set_digest": self.write_set_digest.hex(),
            "claims_digest": self.claims_digest.hex() if self.claims_digest else None,
            "proof": [[side.value, sibling.hex()] for side, sibling in self.proof.path],
            "root": self.root.hex(),
            "signature": self.signature.hex(),
            "node_public_id": self.node_public_id.hex(),
            "node_endorsement": self.node_endorsement.hex(),
            "signature_txid": str(self.signature_txid),
        }

    def to_text(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "Receipt":
        try:
            missing = [name for name in RECEIPT_FIELDS if name not in data]
            if missing:
                raise EncodingError(f"receipt is missing {', '.join(missing)}")
            claims = data["claims_digest"]
            return cls(
                txid=TransactionId.parse(data["txid"]),
                write_set_digest=Digest(from_hex(data["write_set_digest"])),
                claims_digest=Digest(from_hex(claims)) if claims else None,
                proof=MerkleProof(
                    tuple(
                        (Side(side), Digest(from_hex(sibling, "proof")))
                        for side, sibling in data["proof"]
                    )
                ),
                root=Digest(from_hex(data["root"], "root")),
                signature=from_hex(data["signature"], "signature"),
                node_public_id=from_hex(data["node_public_id"], "node_public_id"),
                node_endorsement=from_hex(
                    data["node_endorsement"], "node_endorsement"
                ),
                signature_txid=TransactionId.parse(data["signature_txid"]),
            )
        except EncodingError:
            raise
        except Exception as e:
            raise EncodingError(f"malformed receipt: {e}")

    @classmethod
    def from_text(cls, text: str) -> "Receipt":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise EncodingError(f"receipt is not JSON: {e}")


def verify_receipt(receipt: Receipt, service_public_id: bytes) -> bool:
    """
    Offline receipt check against a service identity.

    True iff the service endorsed the signing node, the node signed the root,
    and the leaf recomputed from txid and digests folds to that root.
    """
    if not verify(
        service_public_id,
        endorsement_message(receipt.node_public_id),
        receipt.node_endorsement,
    ):
        return False
    if not verify(receipt.node_public_id, receipt.root, receipt.signature):
        return False
    try:
        leaf = receipt.leaf
    except Exception:
        return False
    return verify_proof(leaf, receipt.proof, receipt.root)
