from .primitives import (
    ALGORITHM_SUITE,
    DIGEST_SIZE,
    ZERO_DIGEST,
    Digest,
    EncryptionKeyPair,
    KeyPair,
    SymmetricSecret,
    aead_decrypt,
    aead_encrypt,
    hash_bytes,
    random_bytes,
    seal,
    sign,
    unseal,
    verify,
)
from .shamir import SecretShare, recover_secret, split_secret
