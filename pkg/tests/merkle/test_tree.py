"""
Tests for the append-only Merkle tree.
"""

import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from consortium_ledger.common.exceptions import EmptyTreeError, ProofRangeError
from consortium_ledger.crypto import hash_bytes
from consortium_ledger.merkle import (
    MerkleState,
    Side,
    build_root,
    hash_children,
    verify_proof,
)


def leaves(count):
    return [hash_bytes(str(i).encode()) for i in range(1, count + 1)]


class TestElevenLeafLedger(unittest.TestCase):
    """A ledger of eleven transactions, as drawn in the design notes."""

    def setUp(self):
        self.d = leaves(11)
        self.tree = MerkleState(self.d)

    def test_proof_for_seventh_transaction(self):
        # seqno 7 lives at leaf index 6
        proof = self.tree.get_proof(6)
        self.assertEqual(len(proof), 4)
        self.assertEqual(
            [side for side, _ in proof.path],
            [Side.RIGHT, Side.LEFT, Side.LEFT, Side.RIGHT],
        )
        self.assertTrue(verify_proof(self.d[6], proof, self.tree.root()))

    def test_proof_siblings(self):
        d = self.d
        d56 = hash_children(d[4], d[5])
        d1234 = hash_children(hash_children(d[0], d[1]), hash_children(d[2], d[3]))
        d9_11 = hash_children(hash_children(d[8], d[9]), d[10])
        siblings = [sibling for _, sibling in self.tree.get_proof(6).path]
        self.assertEqual(siblings, [d[7], d56, d1234, d9_11])

    def test_root_matches_naive_construction(self):
        self.assertEqual(self.tree.root(), build_root(self.d))

    def test_last_leaf_is_promoted(self):
        proof = self.tree.get_proof(10)
        self.assertEqual([side for side, _ in proof.path], [Side.LEFT, Side.LEFT])
        self.assertTrue(verify_proof(self.d[10], proof, self.tree.root()))


class TestMerkleState(unittest.TestCase):
    def test_empty_tree_has_no_root(self):
        with self.assertRaises(EmptyTreeError):
            MerkleState().root()
        with self.assertRaises(EmptyTreeError):
            build_root([])

    def test_single_leaf_is_its_own_root(self):
        leaf = hash_bytes(b"only")
        tree = MerkleState([leaf])
        self.assertEqual(tree.root(), leaf)
        self.assertEqual(len(tree.get_proof(0)), 0)

    def test_out_of_range_proof(self):
        tree = MerkleState(leaves(4))
        with self.assertRaises(ProofRangeError):
            tree.get_proof(4)
        with self.assertRaises(ProofRangeError):
            tree.get_proof(2, size=2)
        with self.assertRaises(ProofRangeError):
            tree.root(5)

    def test_root_with_does_not_mutate(self):
        tree = MerkleState(leaves(5))
        before = tree.root()
        extra = hash_bytes(b"extra")
        predicted = tree.root_with(extra)
        self.assertEqual(tree.root(), before)
        self.assertEqual(len(tree), 5)
        tree.append(extra)
        self.assertEqual(tree.root(), predicted)

    def test_truncate_restores_prefix_root(self):
        d = leaves(9)
        tree = MerkleState(d)
        tree.truncate(6)
        self.assertEqual(tree.root(), build_root(d[:6]))
        self.assertEqual(tree.leaves, d[:6])
        with self.assertRaises(ProofRangeError):
            tree.truncate(7)

    def test_copy_is_independent(self):
        tree = MerkleState(leaves(3))
        clone = tree.copy()
        clone.append(hash_bytes(b"more"))
        self.assertEqual(len(tree), 3)
        self.assertNotEqual(tree.root(), clone.root())

    def test_tampered_leaf_fails(self):
        d = leaves(6)
        tree = MerkleState(d)
        proof = tree.get_proof(2)
        self.assertFalse(verify_proof(d[3], proof, tree.root()))
        self.assertFalse(verify_proof(b"short", proof, tree.root()))


class TestAppendOnly(unittest.TestCase):
    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=40), st.data())
    def test_prefix_roots_and_proofs(self, count, data):
        """Appending never changes the root of an earlier prefix."""
        d = leaves(count)
        tree = MerkleState()
        roots = []
        for leaf in d:
            tree.append(leaf)
            roots.append(tree.root())

        size = data.draw(st.integers(min_value=1, max_value=count))
        index = data.draw(st.integers(min_value=0, max_value=size - 1))
        self.assertEqual(tree.root(size), roots[size - 1])
        self.assertEqual(tree.root(size), build_root(d[:size]))
        self.assertTrue(verify_proof(d[index], tree.get_proof(index, size), roots[size - 1]))


if __name__ == "__main__":
    unittest.main()
