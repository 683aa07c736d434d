"""
Hashing, signing and authenticated encryption.

Algorithms are pinned by ALGORITHM_SUITE, which ledger chunk and snapshot
headers record:

- SHA-256 digests
- Ed25519 signatures for node, member and service identities
- AES-256-GCM for ledger payloads
- X25519 + HKDF-SHA256 + AES-256-GCM to seal recovery shares to members

Key material is derived from caller-supplied random.Random instances so that
simulated runs are reproducible; real deployments must pass a CSPRNG-backed
generator (random.SystemRandom).
"""

import hashlib
import logging
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from consortium_ledger.common.exceptions import CryptoError
from consortium_ledger.result import ErrorType, OperationError, Result

logger = logging.getLogger("consortium_ledger.crypto")

ALGORITHM_SUITE = "sha256/ed25519/aes256gcm/x25519-hkdf-sha256"
DIGEST_SIZE = 32
KEY_SIZE = 32
NONCE_SIZE = 12
SIGNATURE_SIZE = 64


class Digest(bytes):
    """A 32-byte SHA-256 output."""

    def __new__(cls, value: bytes):
        if len(value) != DIGEST_SIZE:
            raise CryptoError(f"digest must be {DIGEST_SIZE} bytes, got {len(value)}")
        return super().__new__(cls, value)

    def __repr__(self) -> str:
        return f"Digest({self.hex()[:16]}...)"


ZERO_DIGEST = Digest(bytes(DIGEST_SIZE))


def hash_bytes(data: bytes) -> Digest:
    return Digest(hashlib.sha256(data).digest())


def random_bytes(rng: random.Random, size: int) -> bytes:
    return rng.randbytes(size)


@dataclass(frozen=True)
class KeyPair:
    """
    Ed25519 identity key pair.

    public_id is the raw 32-byte verification key; secret is the raw 32-byte
    private seed.
    """

    public_id: bytes
    secret: bytes

    @classmethod
    def from_secret(cls, secret: bytes) -> "KeyPair":
        if len(secret) != KEY_SIZE:
            raise CryptoError("Ed25519 seed must be 32 bytes")
        private = Ed25519PrivateKey.from_private_bytes(secret)
        public = private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        return cls(public_id=public, secret=secret)

    @classmethod
    def generate(cls, rng: random.Random) -> "KeyPair":
        return cls.from_secret(random_bytes(rng, KEY_SIZE))

    def __repr__(self) -> str:
        return f"KeyPair(public_id={self.public_id.hex()[:16]}...)"


def sign(key: KeyPair, msg: bytes) -> bytes:
    return Ed25519PrivateKey.from_private_bytes(key.secret).sign(msg)


def verify(public_id: bytes, msg: bytes, sig: bytes) -> bool:
    """Verify an Ed25519 signature. Malformed keys or signatures yield False."""
    try:
        Ed25519PublicKey.from_public_bytes(bytes(public_id)).verify(
            bytes(sig), bytes(msg)
        )
        return True
    except (InvalidSignature, ValueError, TypeError):
        return False


@dataclass(frozen=True)
class SymmetricSecret:
    """A 32-byte AES-256-GCM key."""

    key: bytes

    def __post_init__(self):
        if len(self.key) != KEY_SIZE:
            raise CryptoError(f"symmetric key must be {KEY_SIZE} bytes")

    @classmethod
    def generate(cls, rng: random.Random) -> "SymmetricSecret":
        return cls(random_bytes(rng, KEY_SIZE))

    def derive(self, label: bytes) -> "SymmetricSecret":
        """Derive an independent subkey, so separate purposes never share nonces."""
        hkdf = HKDF(algorithm=hashes.SHA256(), length=KEY_SIZE, salt=None, info=label)
        return SymmetricSecret(hkdf.derive(self.key))

    def __repr__(self) -> str:
        return "SymmetricSecret(<redacted>)"


def aead_encrypt(
    secret: SymmetricSecret, nonce: bytes, plaintext: bytes, aad: bytes = b""
) -> bytes:
    if len(nonce) != NONCE_SIZE:
        raise CryptoError(f"nonce must be {NONCE_SIZE} bytes")
    return AESGCM(secret.key).encrypt(nonce, plaintext, aad)


def aead_decrypt(
    secret: SymmetricSecret, nonce: bytes, ciphertext: bytes, aad: bytes = b""
) -> Result[bytes, OperationError]:
    """
    Decrypt and authenticate.

    Returns:
        Success with the plaintext, or Failure(DECRYPTION_FAILED) on a tag
        mismatch, wrong key, modified aad or malformed input
    """
    try:
        return Result.success(AESGCM(secret.key).decrypt(nonce, ciphertext, aad))
    except (InvalidTag, ValueError) as e:
        return Result.failure(
            OperationError(
                ErrorType.DECRYPTION_FAILED,
                "authenticated decryption failed",
                source_exception=e,
            )
        )


@dataclass(frozen=True)
class EncryptionKeyPair:
    """X25519 key pair a member uses to receive sealed recovery shares."""

    public_key: bytes
    secret: bytes

    @classmethod
    def generate(cls, rng: random.Random) -> "EncryptionKeyPair":
        secret = random_bytes(rng, KEY_SIZE)
        return cls.from_secret(secret)

    @classmethod
    def from_secret(cls, secret: bytes) -> "EncryptionKeyPair":
        private = X25519PrivateKey.from_private_bytes(secret)
        public = private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        return cls(public_key=public, secret=secret)


_SEAL_INFO = b"consortium-ledger share seal v1"


def _seal_key(shared: bytes, ephemeral_public: bytes, recipient: bytes) -> bytes:
    hkdf = HKDF(
        algorithm=hashes.SHA256(),
        length=KEY_SIZE,
        salt=ephemeral_public + recipient,
        info=_SEAL_INFO,
    )
    return hkdf.derive(shared)


def seal(recipient_public_key: bytes, plaintext: bytes, rng: random.Random) -> bytes:
    """
    Encrypt to a member's X25519 public key.

    Output: ephemeral public key (32) || AES-GCM ciphertext. Each message uses
    a fresh ephemeral key, hence a fresh AEAD key, so a zero nonce is safe.
    """
    ephemeral = X25519PrivateKey.from_private_bytes(random_bytes(rng, KEY_SIZE))
    ephemeral_public = ephemeral.public_key().public_bytes(
        Encoding.Raw, PublicFormat.Raw
    )
    try:
        shared = ephemeral.exchange(
            X25519PublicKey.from_public_bytes(recipient_public_key)
        )
    except ValueError as e:
        raise CryptoError(f"invalid recipient key: {e}")
    key = _seal_key(shared, ephemeral_public, recipient_public_key)
    return ephemeral_public + AESGCM(key).encrypt(bytes(NONCE_SIZE), plaintext, None)


def unseal(keys: EncryptionKeyPair, sealed: bytes) -> Result[bytes, OperationError]:
    if len(sealed) < KEY_SIZE + 16:
        return Result.failure(
            OperationError(ErrorType.DECRYPTION_FAILED, "sealed payload too short")
        )
    ephemeral_public, ciphertext = sealed[:KEY_SIZE], sealed[KEY_SIZE:]
    try:
        shared = X25519PrivateKey.from_private_bytes(keys.secret).exchange(
            X25519PublicKey.from_public_bytes(ephemeral_public)
        )
    except ValueError as e:
        return Result.failure(
            OperationError(ErrorType.DECRYPTION_FAILED, str(e), source_exception=e)
        )
    key = _seal_key(shared, ephemeral_public, keys.public_key)
    return aead_decrypt(SymmetricSecret(key), bytes(NONCE_SIZE), ciphertext)
