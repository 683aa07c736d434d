"""
Tests for k-of-n secret sharing.
"""

import itertools
import random
import unittest

from consortium_ledger.common.exceptions import ShareParameterError, ThresholdError
from consortium_ledger.crypto import SecretShare, SymmetricSecret, recover_secret, split_secret
from consortium_ledger.crypto.shamir import gf_div, gf_mul


class TestField(unittest.TestCase):
    def test_multiplication_inverts_division(self):
        for a in (1, 2, 0x53, 0xFF):
            for b in (1, 3, 0xCA, 0x80):
                self.assertEqual(gf_div(gf_mul(a, b), b), a)

    def test_known_product(self):
        # standard AES field example
        self.assertEqual(gf_mul(0x53, 0xCA), 0x01)

    def test_division_by_zero(self):
        with self.assertRaises(ZeroDivisionError):
            gf_div(5, 0)


class TestSplitAndRecover(unittest.TestCase):
    def setUp(self):
        self.rng = random.Random("shamir")
        self.secret = SymmetricSecret.generate(self.rng)

    def test_every_k_subset_reconstructs(self):
        for n in range(1, 6):
            for k in range(1, n + 1):
                shares = split_secret(self.secret, k, n, self.rng)
                for subset in itertools.combinations(shares, k):
                    self.assertEqual(recover_secret(subset, k), self.secret.key, (k, n))

    def test_order_of_shares_is_irrelevant(self):
        shares = split_secret(self.secret, 3, 5, self.rng)
        self.assertEqual(recover_secret([shares[4], shares[0], shares[2]], 3), self.secret.key)

    def test_too_few_shares(self):
        shares = split_secret(self.secret, 3, 5, self.rng)
        with self.assertRaises(ThresholdError):
            recover_secret(shares[:2], 3)

    def test_fewer_than_k_shares_give_another_value(self):
        shares = split_secret(self.secret, 3, 5, self.rng)
        self.assertNotEqual(recover_secret(shares[:2], 2), self.secret.key)

    def test_duplicate_indices_rejected(self):
        shares = split_secret(self.secret, 2, 3, self.rng)
        with self.assertRaises(ShareParameterError):
            recover_secret([shares[0], shares[0]], 2)

    def test_parameter_ranges(self):
        for k, n in ((0, 3), (4, 3), (1, 256)):
            with self.assertRaises(ShareParameterError):
                split_secret(self.secret, k, n, self.rng)
        with self.assertRaises(ShareParameterError):
            recover_secret([SecretShare(1, b"ab"), SecretShare(2, b"a")], 2)

    def test_threshold_one_shares_are_the_secret(self):
        shares = split_secret(b"raw bytes", 1, 3, self.rng)
        self.assertTrue(all(s.payload == b"raw bytes" for s in shares))


if __name__ == "__main__":
    unittest.main()
