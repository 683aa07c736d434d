"""
Tests for write-sets, transactions and the versioned store.
"""

import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from consortium_ledger.common.exceptions import (
    AccessDeniedError,
    CommittedRollbackError,
    EncodingError,
    SequencingError,
)
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.kv import StoreState, Tx, Update, WriteSet, decode_updates, encode_updates
from consortium_ledger.kv.maps import APP_MESSAGES, NODES_INFO, MapName

PUBLIC = "public:test"
PRIVATE = "test"

update_strategy = st.builds(
    Update,
    st.sampled_from([MapName(PUBLIC), MapName(PRIVATE)]),
    st.binary(min_size=1, max_size=3),
    st.one_of(st.none(), st.binary(max_size=8)),
)


def write_set(*updates):
    ws = WriteSet()
    for map_name, key, value in updates:
        if value is None:
            ws.remove(map_name, key)
        else:
            ws.put(map_name, key, value)
    return ws


class TestWriteSet(unittest.TestCase):
    def test_last_write_wins(self):
        ws = write_set((PRIVATE, b"k", b"1"), (PRIVATE, b"k", b"2"), (PRIVATE, b"j", None))
        self.assertEqual(len(ws), 2)
        self.assertEqual(ws.lookup(PRIVATE, b"k"), (True, b"2"))
        self.assertEqual(ws.lookup(PRIVATE, b"j"), (True, None))
        self.assertEqual(ws.lookup(PRIVATE, b"x"), (False, None))

    def test_encoding_ignores_write_order(self):
        a = write_set((PRIVATE, b"b", b"2"), (PUBLIC, b"a", b"1"))
        b = write_set((PUBLIC, b"a", b"1"), (PRIVATE, b"b", b"2"))
        self.assertEqual(a, b)
        self.assertEqual(encode_updates(a.updates()), encode_updates(b.updates()))

    def test_visibility_split(self):
        ws = write_set((PRIVATE, b"b", b"2"), (PUBLIC, b"a", b"1"))
        self.assertEqual([u.map_name for u in ws.public_updates], [PUBLIC])
        self.assertEqual([u.map_name for u in ws.private_updates], [PRIVATE])
        self.assertFalse(ws.without(PUBLIC).touches(PUBLIC))

    def test_truncated_payload(self):
        data = encode_updates(write_set((PUBLIC, b"a", b"1")).updates())
        with self.assertRaises(EncodingError):
            decode_updates(data[:-1])
        with self.assertRaises(EncodingError):
            decode_updates(data + b"\x00")

    @settings(max_examples=80, deadline=None)
    @given(st.lists(update_strategy, max_size=20))
    def test_decoded_updates_rebuild_the_write_set(self, updates):
        ws = WriteSet(updates)
        self.assertEqual(WriteSet(decode_updates(encode_updates(ws.updates()))), ws)


class TestTx(unittest.TestCase):
    def setUp(self):
        self.store = StoreState()
        self.store.apply(TransactionId(1, 1), write_set((PRIVATE, b"k", b"base")))

    def test_reads_see_own_writes(self):
        tx = Tx(self.store)
        self.assertEqual(tx.get(PRIVATE, b"k"), b"base")
        tx.put(PRIVATE, b"k", b"mine")
        tx.put(PRIVATE, b"z", b"new")
        self.assertEqual(tx.get(PRIVATE, b"k"), b"mine")
        tx.remove(PRIVATE, b"k")
        self.assertIsNone(tx.get(PRIVATE, b"k"))
        self.assertEqual(list(tx.items(PRIVATE)), [(b"z", b"new")])
        # the store is untouched until the write-set is applied
        self.assertEqual(self.store.get(PRIVATE, b"k"), b"base")
        self.assertEqual(tx.read_version, TransactionId(1, 1))

    def test_reserved_maps_need_privilege(self):
        with self.assertRaises(AccessDeniedError):
            Tx(self.store).put(NODES_INFO, b"n0", b"{}")
        privileged = Tx(self.store, privileged=True)
        privileged.put(NODES_INFO, b"n0", b"{}")
        self.assertTrue(privileged.write_set.touches(NODES_INFO))

    def test_nested_writes_reach_parent_on_merge(self):
        parent = Tx(self.store)
        child = parent.nested()
        child.put(APP_MESSAGES, b"1", b"hello")
        self.assertIsNone(parent.get(APP_MESSAGES, b"1"))
        self.assertEqual(child.get(PRIVATE, b"k"), b"base")
        parent.merge_child(child)
        self.assertEqual(parent.get(APP_MESSAGES, b"1"), b"hello")
        self.assertFalse(child.is_read_only)


class TestStoreState(unittest.TestCase):
    def test_apply_must_be_contiguous(self):
        store = StoreState()
        with self.assertRaises(SequencingError):
            store.apply(TransactionId(1, 2), WriteSet())
        store.apply(TransactionId(2, 1), WriteSet())
        with self.assertRaises(SequencingError):
            store.apply(TransactionId(1, 2), WriteSet())

    def test_rollback_restores_values(self):
        store = StoreState()
        store.apply(TransactionId(1, 1), write_set((PUBLIC, b"a", b"1")))
        snapshot = store.copy()
        store.apply(TransactionId(1, 2), write_set((PUBLIC, b"a", b"2"), (PRIVATE, b"b", b"x")))
        store.apply(TransactionId(1, 3), write_set((PUBLIC, b"a", None)))
        store.rollback_to(1)
        self.assertTrue(store.same_contents(snapshot))
        self.assertEqual(store.applied_upto, TransactionId(1, 1))

    def test_rollback_below_commit_refused(self):
        store = StoreState()
        for seqno in range(1, 5):
            store.apply(TransactionId(1, seqno), write_set((PUBLIC, b"a", str(seqno).encode())))
        store.compact(3)
        self.assertEqual(store.commit_seqno, 3)
        self.assertEqual(store.undo_depth, 1)
        with self.assertRaises(CommittedRollbackError):
            store.rollback_to(2)
        store.rollback_to(3)
        self.assertEqual(store.get(PUBLIC, b"a"), b"3")

    def test_compact_never_passes_applied(self):
        store = StoreState()
        store.apply(TransactionId(1, 1), WriteSet())
        store.compact(10)
        self.assertEqual(store.commit_seqno, 1)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.lists(update_strategy, max_size=6), min_size=1, max_size=12), st.data())
    def test_replay_and_rollback_agree(self, batches, data):
        """Rolling back to k leaves the same store as replaying the first k write-sets."""
        store = StoreState()
        for seqno, batch in enumerate(batches, start=1):
            store.apply(TransactionId(1, seqno), WriteSet(batch))

        k = data.draw(st.integers(min_value=0, max_value=len(batches)))
        replay = StoreState()
        for seqno, batch in enumerate(batches[:k], start=1):
            replay.apply(TransactionId(1, seqno), WriteSet(batch))

        store.rollback_to(k)
        self.assertTrue(store.same_contents(replay))
        self.assertEqual(store.applied_upto.seqno, k)


if __name__ == "__main__":
    unittest.main()
