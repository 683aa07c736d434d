"""
Tests for receipts and their offline verification.
"""

import random
import unittest

from consortium_ledger.common.exceptions import EncodingError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.crypto import KeyPair, hash_bytes, sign
from consortium_ledger.merkle import (
    MerkleState,
    Receipt,
    endorsement_message,
    leaf_digest,
    verify_receipt,
)


class TestReceipt(unittest.TestCase):
    def setUp(self):
        rng = random.Random("receipt")
        self.service = KeyPair.generate(rng)
        self.node = KeyPair.generate(rng)
        self.txids = [TransactionId(2, s) for s in range(1, 6)]
        self.write_sets = [hash_bytes(f"ws{s}".encode()) for s in range(1, 6)]
        self.claims = hash_bytes(b"claims")
        tree = MerkleState()
        for i, (txid, ws) in enumerate(zip(self.txids, self.write_sets)):
            tree.append(leaf_digest(txid, ws, self.claims if i == 2 else None))
        root = tree.root()
        self.receipt = Receipt(
            txid=self.txids[2],
            write_set_digest=self.write_sets[2],
            claims_digest=self.claims,
            proof=tree.get_proof(2),
            root=root,
            signature=sign(self.node, root),
            node_public_id=self.node.public_id,
            node_endorsement=sign(self.service, endorsement_message(self.node.public_id)),
            signature_txid=TransactionId(2, 6),
        )

    def test_valid_receipt(self):
        self.assertTrue(verify_receipt(self.receipt, self.service.public_id))

    def test_text_form_survives(self):
        text = self.receipt.to_text()
        parsed = Receipt.from_text(text)
        self.assertEqual(parsed, self.receipt)
        self.assertTrue(verify_receipt(parsed, self.service.public_id))
        self.assertEqual(
            list(self.receipt.to_dict())[:3], ["txid", "write_set_digest", "claims_digest"]
        )

    def test_other_service_rejects(self):
        other = KeyPair.generate(random.Random("other service"))
        self.assertFalse(verify_receipt(self.receipt, other.public_id))

    def test_altered_fields_reject(self):
        data = self.receipt.to_dict()
        for field, value in (
            ("txid", "2.4"),
            ("write_set_digest", self.write_sets[0].hex()),
            ("claims_digest", None),
            ("root", hash_bytes(b"root").hex()),
        ):
            altered = Receipt.from_dict({**data, field: value})
            self.assertFalse(
                verify_receipt(altered, self.service.public_id), f"altered {field}"
            )

    def test_unendorsed_node_rejects(self):
        rogue = KeyPair.generate(random.Random("rogue"))
        data = self.receipt.to_dict()
        data["node_public_id"] = rogue.public_id.hex()
        data["signature"] = sign(rogue, self.receipt.root).hex()
        self.assertFalse(verify_receipt(Receipt.from_dict(data), self.service.public_id))

    def test_malformed_text(self):
        with self.assertRaises(EncodingError):
            Receipt.from_text("not json")
        data = self.receipt.to_dict()
        del data["proof"]
        with self.assertRaises(EncodingError):
            Receipt.from_dict(data)
        with self.assertRaises(EncodingError):
            Receipt.from_dict({**self.receipt.to_dict(), "root": "zz"})


if __name__ == "__main__":
    unittest.main()
