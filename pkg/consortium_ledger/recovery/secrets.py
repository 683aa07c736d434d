"""
Ledger secret wrapping and recovery shares.

The ledger secret is encrypted under a one-off wrapping key, and the
wrapping key is split k-of-n across the consortium members. Each share is
sealed to one member's encryption key. Everything written here is public:

    public:ccf.internal.ledger_secret["wrapped"]   AES-GCM(wrapping key, ledger secret)
    public:ccf.internal.recovery_shares[member_id] {"index", "sealed", "threshold"}

A fresh wrapping key is drawn at every issue, so the fixed nonce never repeats
under one key.
"""

import itertools
import logging
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from consortium_ledger.common.encoding import canonical_json, from_hex, parse_json
from consortium_ledger.common.exceptions import (
    CryptoError,
    EncodingError,
    ShareParameterError,
)
from consortium_ledger.crypto.primitives import (
    EncryptionKeyPair,
    SymmetricSecret,
    aead_decrypt,
    aead_encrypt,
    seal,
    unseal,
)
from consortium_ledger.crypto.shamir import SecretShare, recover_secret, split_secret
from consortium_ledger.kv.maps import LEDGER_SECRET, RECOVERY_SHARES, WRAPPED_SECRET_KEY
from consortium_ledger.kv.records import member_encryption_keys
from consortium_ledger.result import ErrorType, OperationError, Result

logger = logging.getLogger("consortium_ledger.recovery")

WRAP_NONCE = bytes(12)
WRAP_AAD = b"ledger-secret"


@dataclass(frozen=True)
class ShareRecord:
    """One member's sealed share as stored on the ledger."""

    index: int
    sealed: bytes
    threshold: int

    def to_bytes(self) -> bytes:
        return canonical_json(
            {"index": self.index, "sealed": self.sealed.hex(), "threshold": self.threshold}
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "ShareRecord":
        doc = parse_json(data)
        try:
            return cls(int(doc["index"]), from_hex(doc["sealed"], "sealed"), int(doc["threshold"]))
        except (KeyError, TypeError, ValueError) as e:
            raise EncodingError(f"malformed share record: {e}")


def issue_shares(
    tx, ledger_secret: SymmetricSecret, threshold: int, rng: random.Random
) -> List[str]:
    """
    Wrap the ledger secret under a new key and share that key among members.

    Args:
        tx: Privileged transaction to write into
        ledger_secret: Secret to protect
        threshold: Shares needed to recover, 1 <= threshold <= members
        rng: Source of key material

    Returns:
        Ids of the members that received a share

    Raises:
        ShareParameterError: If the threshold is out of range
    """
    members = member_encryption_keys(tx)
    if not 1 <= threshold <= len(members):
        raise ShareParameterError(
            f"recovery threshold {threshold} needs between 1 and {len(members)} members"
        )
    wrapping_key = SymmetricSecret.generate(rng)
    tx.put(
        LEDGER_SECRET,
        WRAPPED_SECRET_KEY,
        aead_encrypt(wrapping_key, WRAP_NONCE, ledger_secret.key, WRAP_AAD),
    )
    member_ids = sorted(members)
    for key, _ in list(tx.items(RECOVERY_SHARES)):
        if key.decode() not in members:
            tx.remove(RECOVERY_SHARES, key)
    shares = split_secret(wrapping_key, threshold, len(member_ids), rng)
    for member_id, share in zip(member_ids, shares):
        record = ShareRecord(share.index, seal(members[member_id], share.payload, rng), threshold)
        tx.put(RECOVERY_SHARES, member_id.encode(), record.to_bytes())
    logger.info(f"Issued {len(member_ids)} recovery shares, threshold {threshold}")
    return member_ids


def read_share_record(reader, member_id: str) -> Optional[ShareRecord]:
    value = reader.get(RECOVERY_SHARES, member_id.encode())
    return ShareRecord.from_bytes(value) if value is not None else None


def recovery_threshold(reader) -> Optional[int]:
    for _, value in reader.items(RECOVERY_SHARES):
        return ShareRecord.from_bytes(value).threshold
    return None


def open_share(
    keys: EncryptionKeyPair, record: ShareRecord
) -> Result[SecretShare, OperationError]:
    """Member side: unseal a share with the member's encryption key."""
    return unseal(keys, record.sealed).map(lambda payload: SecretShare(record.index, payload))


def unwrap_ledger_secret(
    wrapped: bytes, shares: Sequence[SecretShare], threshold: int
) -> Result[SymmetricSecret, OperationError]:
    """
    Reconstruct the wrapping key from threshold shares and decrypt the secret.

    Fewer or wrong shares yield a different key, which the AEAD tag rejects.
    """
    try:
        key = recover_secret(shares, threshold)
        wrapping_key = SymmetricSecret(key)
    except CryptoError as e:
        return Result.failure(OperationError.from_exception(e, ErrorType.SHARE_REJECTED))
    return aead_decrypt(wrapping_key, WRAP_NONCE, wrapped, WRAP_AAD).map(SymmetricSecret)


def search_ledger_secret(
    wrapped: bytes, shares: Dict[str, SecretShare], threshold: int
) -> Result[Tuple[SymmetricSecret, Tuple[str, ...]], OperationError]:
    """
    Try every threshold-sized combination of the submitted shares.

    Returns:
        The ledger secret and the members whose shares unwrapped it
    """
    if len(shares) < threshold:
        return Result.failure(
            OperationError(
                ErrorType.SHARE_REJECTED,
                f"{len(shares)} of {threshold} shares submitted",
            )
        )
    for combo in itertools.combinations(sorted(shares), threshold):
        secret = unwrap_ledger_secret(wrapped, [shares[m] for m in combo], threshold)
        if secret.is_success():
            return Result.success((secret.unwrap(), combo))
    return Result.failure(
        OperationError(ErrorType.SHARE_REJECTED, "no combination of shares unwraps the ledger secret")
    )
