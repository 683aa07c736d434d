"""
Tests for share collection on a recovering node.
"""

import random
import unittest

from consortium_ledger.common.exceptions import EncodingError
from consortium_ledger.crypto import SecretShare, SymmetricSecret
from consortium_ledger.kv import StoreState, Tx
from consortium_ledger.recovery import (
    RecoverySession,
    issue_shares,
    open_share,
    parse_share,
    read_share_record,
    share_body,
)
from consortium_ledger.result import ErrorType

from tests.recovery.test_secrets import consortium


class TestRecoverySession(unittest.TestCase):
    def setUp(self):
        rng = random.Random("session")
        self.secret = SymmetricSecret.generate(rng)
        self.members, store = consortium(3, seed="session")
        self.tx = Tx(store, privileged=True)
        issue_shares(self.tx, self.secret, 2, rng)
        self.shares = {
            m.member_id: open_share(m.encryption, read_share_record(self.tx, m.member_id)).unwrap()
            for m in self.members
        }
        self.session = RecoverySession(recovered_seqno=10, previous_identity=b"\x01" * 32)

    def test_waits_for_threshold(self):
        first = self.session.submit(self.tx, "m0", self.shares["m0"])
        self.assertTrue(first.is_success())
        self.assertIsNone(first.unwrap())
        second = self.session.submit(self.tx, "m2", self.shares["m2"])
        self.assertEqual(second.unwrap().key, self.secret.key)
        self.assertEqual(self.session.submitted, 2)

    def test_bad_share_is_held(self):
        self.session.submit(self.tx, "m0", self.shares["m0"])
        bogus = SecretShare(self.shares["m1"].index, bytes(32))
        pending = self.session.submit(self.tx, "m1", bogus)
        self.assertTrue(pending.is_success())
        self.assertIsNone(pending.unwrap())
        self.assertEqual(self.session.submitted, 2)
        self.assertEqual(self.session.submit(self.tx, "m2", self.shares["m2"]).unwrap().key, self.secret.key)
        self.assertEqual(self.session.rejected, ["m1"])

    def test_corrupt_share_first(self):
        bogus = SecretShare(self.shares["m0"].index, bytes(32))
        self.assertIsNone(self.session.submit(self.tx, "m0", bogus).unwrap())
        self.assertIsNone(self.session.submit(self.tx, "m1", self.shares["m1"]).unwrap())
        recovered = self.session.submit(self.tx, "m2", self.shares["m2"])
        self.assertEqual(recovered.unwrap().key, self.secret.key)
        self.assertEqual(self.session.rejected, ["m0"])

    def test_resubmission_replaces_share(self):
        self.session.submit(self.tx, "m0", SecretShare(self.shares["m0"].index, bytes(32)))
        self.session.submit(self.tx, "m0", self.shares["m0"])
        self.assertEqual(self.session.submitted, 1)
        self.assertEqual(self.session.submit(self.tx, "m1", self.shares["m1"]).unwrap().key, self.secret.key)

    def test_nothing_issued(self):
        result = self.session.submit(StoreState(), "m0", self.shares["m0"])
        self.assertEqual(result.error().type, ErrorType.SHARE_REJECTED)

    def test_share_body(self):
        share = self.shares["m1"]
        self.assertEqual(parse_share(share_body(share)), share)
        for body in ({}, {"share": {"index": 1}}, {"share": {"index": "x", "payload": "00"}}):
            with self.assertRaises(EncodingError):
                parse_share(body)


if __name__ == "__main__":
    unittest.main()
