"""
Tests for hashing, signing and authenticated encryption.
"""

import random
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from consortium_ledger.common.exceptions import CryptoError
from consortium_ledger.crypto import (
    DIGEST_SIZE,
    EncryptionKeyPair,
    KeyPair,
    SymmetricSecret,
    aead_decrypt,
    aead_encrypt,
    hash_bytes,
    seal,
    sign,
    unseal,
    verify,
)
from consortium_ledger.result import ErrorType

NONCE = bytes(range(12))


class TestHashing(unittest.TestCase):
    def test_known_digest(self):
        """SHA-256 of the empty string."""
        self.assertEqual(
            hash_bytes(b"").hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
        )
        self.assertEqual(len(hash_bytes(b"abc")), DIGEST_SIZE)


class TestSignatures(unittest.TestCase):
    def setUp(self):
        self.key = KeyPair.generate(random.Random("sig"))

    def test_same_seed_same_key(self):
        other = KeyPair.generate(random.Random("sig"))
        self.assertEqual(self.key.public_id, other.public_id)

    def test_wrong_key_rejected(self):
        other = KeyPair.generate(random.Random("other"))
        signature = sign(self.key, b"message")
        self.assertTrue(verify(self.key.public_id, b"message", signature))
        self.assertFalse(verify(other.public_id, b"message", signature))

    def test_malformed_inputs_yield_false(self):
        self.assertFalse(verify(b"short", b"message", bytes(64)))
        self.assertFalse(verify(self.key.public_id, b"message", b"not a signature"))

    def test_bad_seed_length(self):
        with self.assertRaises(CryptoError):
            KeyPair.from_secret(b"\x00" * 31)

    @settings(max_examples=50, deadline=None)
    @given(st.binary(max_size=256), st.integers(min_value=0, max_value=255))
    def test_any_bit_flip_breaks_signature(self, message, position):
        """Sign/verify succeeds, and flipping any byte of the message breaks it."""
        signature = sign(self.key, message)
        self.assertTrue(verify(self.key.public_id, message, signature))
        if message:
            index = position % len(message)
            tampered = message[:index] + bytes([message[index] ^ 1]) + message[index + 1 :]
            self.assertFalse(verify(self.key.public_id, tampered, signature))


class TestAead(unittest.TestCase):
    def setUp(self):
        self.secret = SymmetricSecret.generate(random.Random("aead"))

    @settings(max_examples=50, deadline=None)
    @given(st.binary(max_size=512), st.binary(max_size=64))
    def test_round_trip_and_aad_binding(self, plaintext, aad):
        ciphertext = aead_encrypt(self.secret, NONCE, plaintext, aad)
        self.assertEqual(aead_decrypt(self.secret, NONCE, ciphertext, aad).unwrap(), plaintext)
        wrong = aead_decrypt(self.secret, NONCE, ciphertext, aad + b"x")
        self.assertTrue(wrong.is_failure())
        self.assertEqual(wrong.error().type, ErrorType.DECRYPTION_FAILED)

    def test_tampered_ciphertext_rejected(self):
        ciphertext = bytearray(aead_encrypt(self.secret, NONCE, b"private payload"))
        ciphertext[3] ^= 0x80
        self.assertTrue(aead_decrypt(self.secret, NONCE, bytes(ciphertext)).is_failure())

    def test_wrong_key_rejected(self):
        ciphertext = aead_encrypt(self.secret, NONCE, b"payload")
        other = SymmetricSecret.generate(random.Random("other"))
        self.assertTrue(aead_decrypt(other, NONCE, ciphertext).is_failure())

    def test_bad_nonce_and_key_sizes(self):
        with self.assertRaises(CryptoError):
            aead_encrypt(self.secret, b"short", b"payload")
        with self.assertRaises(CryptoError):
            SymmetricSecret(b"\x01" * 16)

    def test_derived_keys_differ(self):
        a = self.secret.derive(b"a")
        self.assertNotEqual(a.key, self.secret.key)
        self.assertNotEqual(a.key, self.secret.derive(b"b").key)
        self.assertEqual(a.key, self.secret.derive(b"a").key)

    def test_repr_hides_key(self):
        self.assertNotIn(self.secret.key.hex(), repr(self.secret))


class TestSealing(unittest.TestCase):
    def setUp(self):
        self.rng = random.Random("seal")
        self.member = EncryptionKeyPair.generate(self.rng)

    def test_only_recipient_can_unseal(self):
        sealed = seal(self.member.public_key, b"share bytes", self.rng)
        self.assertEqual(unseal(self.member, sealed).unwrap(), b"share bytes")
        other = EncryptionKeyPair.generate(self.rng)
        self.assertTrue(unseal(other, sealed).is_failure())

    def test_truncated_payload_rejected(self):
        sealed = seal(self.member.public_key, b"share bytes", self.rng)
        result = unseal(self.member, sealed[:20])
        self.assertEqual(result.error().type, ErrorType.DECRYPTION_FAILED)

    def test_each_seal_uses_fresh_ephemeral_key(self):
        first = seal(self.member.public_key, b"same", self.rng)
        second = seal(self.member.public_key, b"same", self.rng)
        self.assertNotEqual(first, second)


if __name__ == "__main__":
    unittest.main()
