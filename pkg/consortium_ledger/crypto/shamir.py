"""
Byte-wise Shamir secret sharing over GF(2^8).

Each byte of the secret is the constant term of an independent random
polynomial of degree k-1; share i holds the evaluations at x=i. Recovery is
Lagrange interpolation at x=0, byte by byte.
"""

import random
from dataclasses import dataclass
from typing import List, Sequence, Union

from consortium_ledger.common.exceptions import ShareParameterError, ThresholdError
from consortium_ledger.crypto.primitives import SymmetricSecret

# GF(2^8) with the AES reduction polynomial x^8 + x^4 + x^3 + x + 1
_EXP = [0] * 512
_LOG = [0] * 256


def _build_tables() -> None:
    x = 1
    for i in range(255):
        _EXP[i] = x
        _LOG[x] = i
        # multiply by the generator 3
        x ^= (x << 1) ^ (0x11B if x & 0x80 else 0)
        x &= 0xFF
    for i in range(255, 512):
        _EXP[i] = _EXP[i - 255]


_build_tables()


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def gf_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return _EXP[(_LOG[a] - _LOG[b]) % 255]


def eval_poly(coefficients: Sequence[int], x: int) -> int:
    """Horner evaluation; coefficients[0] is the constant term."""
    acc = 0
    for c in reversed(coefficients):
        acc = gf_mul(acc, x) ^ c
    return acc


@dataclass(frozen=True)
class SecretShare:
    index: int
    payload: bytes

    def __repr__(self) -> str:
        return f"SecretShare(index={self.index}, len={len(self.payload)})"


def split_secret(
    secret: Union[SymmetricSecret, bytes], k: int, n: int, rng: random.Random
) -> List[SecretShare]:
    """
    Split a secret into n shares, any k of which reconstruct it.

    Args:
        secret: Key or raw bytes to split
        k: Threshold, 1 <= k <= n
        n: Share count, n <= 255
        rng: Source of polynomial coefficients

    Raises:
        ShareParameterError: If k or n is out of range
    """
    data = secret.key if isinstance(secret, SymmetricSecret) else bytes(secret)
    if not 1 <= k <= n <= 255:
        raise ShareParameterError(f"need 1 <= k <= n <= 255, got k={k}, n={n}")

    polys = [[b] + [rng.randrange(256) for _ in range(k - 1)] for b in data]
    return [
        SecretShare(index=x, payload=bytes(eval_poly(p, x) for p in polys))
        for x in range(1, n + 1)
    ]


def interpolate_at_zero(shares: Sequence[SecretShare]) -> bytes:
    xs = [s.index for s in shares]
    weights = []
    for i, xi in enumerate(xs):
        num, den = 1, 1
        for j, xj in enumerate(xs):
            if i != j:
                num = gf_mul(num, xj)
                den = gf_mul(den, xi ^ xj)
        weights.append(gf_div(num, den))

    size = len(shares[0].payload)
    out = bytearray(size)
    for weight, share in zip(weights, shares):
        for pos in range(size):
            out[pos] ^= gf_mul(weight, share.payload[pos])
    return bytes(out)


def recover_secret(shares: Sequence[SecretShare], k: int) -> bytes:
    """
    Reconstruct the secret from at least k shares.

    Only the first k shares are used. Genuine shares always reproduce the
    original; wrong or insufficient ones silently produce a different value,
    so callers authenticate the result (the recovery module unwraps an AEAD
    ciphertext with it).

    Raises:
        ThresholdError: Fewer than k shares supplied
        ShareParameterError: Duplicate or out-of-range indices, mismatched lengths
    """
    if k < 1:
        raise ShareParameterError(f"threshold must be positive, got {k}")
    if len(shares) < k:
        raise ThresholdError(f"{len(shares)} shares supplied, threshold is {k}")
    indices = [s.index for s in shares]
    if len(set(indices)) != len(indices):
        raise ShareParameterError(f"duplicate share indices in {sorted(indices)}")
    if any(not 1 <= i <= 255 for i in indices):
        raise ShareParameterError("share index outside 1..255")
    if len({len(s.payload) for s in shares}) != 1:
        raise ShareParameterError("share payloads differ in length")

    return interpolate_at_zero(list(shares)[:k])
