"""
Tests for taking and restoring store snapshots.
"""

import random
import unittest

from consortium_ledger.common.exceptions import SnapshotError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.crypto import KeyPair, SymmetricSecret, hash_bytes, sign
from consortium_ledger.kv import StoreState, WriteSet, restore_snapshot, take_snapshot
from consortium_ledger.kv.snapshot import open_private
from consortium_ledger.merkle import MerkleState, Receipt, endorsement_message, leaf_digest


class TestSnapshot(unittest.TestCase):
    def setUp(self):
        rng = random.Random("snapshot")
        self.secret = SymmetricSecret.generate(rng)
        self.service = KeyPair.generate(rng)
        self.node = KeyPair.generate(rng)

        self.store = StoreState()
        self.leaves = []
        for seqno in range(1, 4):
            ws = WriteSet()
            ws.put("public:app.msgs", str(seqno).encode(), b"public")
            ws.put("app.msgs", str(seqno).encode(), b"secret")
            txid = TransactionId(1, seqno)
            self.store.apply(txid, ws)
            self.leaves.append(leaf_digest(txid, hash_bytes(str(seqno).encode()), None))

        self.snapshot = take_snapshot(self.store, self.leaves, [(1, 1)], self.secret)

    def finalize(self, snapshot, claims=None):
        """Attach a receipt for an evidence entry right after the snapshot."""
        evidence_txid = TransactionId(1, snapshot.seqno + 1)
        ws_digest = hash_bytes(b"evidence")
        claims = snapshot.digest if claims is None else claims
        tree = MerkleState(self.leaves)
        tree.append(leaf_digest(evidence_txid, ws_digest, claims))
        root = tree.root()
        snapshot.receipt = Receipt(
            txid=evidence_txid,
            write_set_digest=ws_digest,
            claims_digest=claims,
            proof=tree.get_proof(len(tree) - 1),
            root=root,
            signature=sign(self.node, root),
            node_public_id=self.node.public_id,
            node_endorsement=sign(self.service, endorsement_message(self.node.public_id)),
            signature_txid=TransactionId(1, snapshot.seqno + 2),
        )
        return snapshot

    def test_restore_finalized_snapshot(self):
        data = self.finalize(self.snapshot).to_bytes()
        restored = restore_snapshot(data, self.secret, self.service.public_id)
        self.assertTrue(restored.store.same_contents(self.store))
        self.assertEqual(restored.txid, TransactionId(1, 3))
        self.assertEqual(restored.leaves, self.leaves)
        self.assertEqual(restored.view_history, [(1, 1)])
        self.assertEqual(restored.as_snapshot().digest, self.snapshot.digest)

    def test_private_maps_stay_sealed_without_secret(self):
        data = self.finalize(self.snapshot).to_bytes()
        restored = restore_snapshot(data, None, self.service.public_id)
        self.assertIsNone(restored.store.get("app.msgs", b"1"))
        self.assertEqual(restored.store.get("public:app.msgs", b"1"), b"public")
        open_private(restored, self.secret)
        self.assertTrue(restored.store.same_contents(self.store))

    def test_wrong_secret(self):
        data = self.finalize(self.snapshot).to_bytes()
        other = SymmetricSecret.generate(random.Random("other"))
        with self.assertRaises(SnapshotError):
            restore_snapshot(data, other, self.service.public_id)

    def test_unfinalized_snapshot_refused(self):
        with self.assertRaises(SnapshotError):
            restore_snapshot(self.snapshot.to_bytes(), self.secret, self.service.public_id)

    def test_other_service_refused(self):
        data = self.finalize(self.snapshot).to_bytes()
        stranger = KeyPair.generate(random.Random("stranger"))
        with self.assertRaises(SnapshotError):
            restore_snapshot(data, self.secret, stranger.public_id)

    def test_evidence_for_other_contents_refused(self):
        data = self.finalize(self.snapshot, claims=hash_bytes(b"something else")).to_bytes()
        with self.assertRaises(SnapshotError):
            restore_snapshot(data, self.secret, self.service.public_id)

    def test_private_maps_need_secret(self):
        with self.assertRaises(SnapshotError):
            take_snapshot(self.store, self.leaves, [(1, 1)], None)

    def test_leaf_count_must_match(self):
        with self.assertRaises(SnapshotError):
            take_snapshot(self.store, self.leaves[:2], [(1, 1)], self.secret)

    def test_garbage_refused(self):
        with self.assertRaises(SnapshotError):
            restore_snapshot(b"not a snapshot at all", self.secret, self.service.public_id)
        data = self.finalize(self.snapshot).to_bytes()
        with self.assertRaises(SnapshotError):
            restore_snapshot(data[:-10], self.secret, self.service.public_id)


if __name__ == "__main__":
    unittest.main()
