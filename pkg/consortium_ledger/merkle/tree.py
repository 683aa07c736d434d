"""
Append-only Merkle tree over ledger leaf digests.

Interior nodes are hash(left || right). Leaves are paired left to right and
an unpaired last node is promoted unchanged to the next level, which gives
the same shape as splitting at the largest power of two.

Hashes of complete aligned subtrees never change once all their leaves
exist, so they are cached per level; only the O(log n) nodes on the right
edge are recomputed for a root or proof.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from consortium_ledger.common.exceptions import EmptyTreeError, ProofRangeError
from consortium_ledger.crypto.primitives import Digest, hash_bytes

logger = logging.getLogger("consortium_ledger.merkle")


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class MerkleProof:
    """Sibling path from a leaf up to the root, leaf end first."""

    path: Tuple[Tuple[Side, Digest], ...]

    def __len__(self) -> int:
        return len(self.path)


def hash_children(left: bytes, right: bytes) -> Digest:
    return hash_bytes(left + right)


class MerkleState:
    """
    Mutable single-writer Merkle tree. Leaf indices are 0-based; the ledger
    maps seqno s to leaf s - 1 (or s - 1 - start for trees seeded from a
    snapshot, see Ledger).
    """

    def __init__(self, leaves: Optional[Sequence[bytes]] = None):
        # _levels[h][j] is the hash of the complete subtree of 2**h leaves
        # starting at leaf j * 2**h
        self._levels: List[List[Digest]] = [[]]
        for leaf in leaves or ():
            self.append(leaf)

    @property
    def leaf_count(self) -> int:
        return len(self._levels[0])

    def __len__(self) -> int:
        return self.leaf_count

    def leaf(self, index: int) -> Digest:
        if not 0 <= index < self.leaf_count:
            raise ProofRangeError(f"leaf {index} outside tree of {self.leaf_count}")
        return self._levels[0][index]

    @property
    def leaves(self) -> List[Digest]:
        return list(self._levels[0])

    def append(self, leaf: bytes) -> None:
        self._levels[0].append(Digest(bytes(leaf)))
        height = 0
        while len(self._levels[height]) % 2 == 0:
            below = self._levels[height]
            if height + 1 == len(self._levels):
                self._levels.append([])
            self._levels[height + 1].append(hash_children(below[-2], below[-1]))
            height += 1

    def truncate(self, leaf_count: int) -> None:
        """Keep only the first leaf_count leaves."""
        if leaf_count < 0 or leaf_count > self.leaf_count:
            raise ProofRangeError(f"cannot truncate {self.leaf_count} to {leaf_count}")
        for height, level in enumerate(self._levels):
            del level[leaf_count >> height :]
        while len(self._levels) > 1 and not self._levels[-1]:
            self._levels.pop()

    def copy(self) -> "MerkleState":
        clone = MerkleState()
        clone._levels = [list(level) for level in self._levels]
        return clone

    def _node(self, height: int, index: int, size: int) -> Digest:
        """Hash of node (height, index) in the tree over the first `size` leaves."""
        span = 1 << height
        if (index + 1) * span <= size:
            return self._levels[height][index]
        left = self._node(height - 1, 2 * index, size)
        if (2 * index + 1) * (span >> 1) >= size:
            return left
        return hash_children(left, self._node(height - 1, 2 * index + 1, size))

    @staticmethod
    def _height(size: int) -> int:
        return (size - 1).bit_length()

    def root(self, size: Optional[int] = None) -> Digest:
        """
        Root over the first `size` leaves (default: all).

        Raises:
            EmptyTreeError: If the tree (prefix) has no leaves
        """
        size = self.leaf_count if size is None else size
        if size <= 0:
            raise EmptyTreeError("root of an empty tree")
        if size > self.leaf_count:
            raise ProofRangeError(f"prefix {size} exceeds {self.leaf_count} leaves")
        return self._node(self._height(size), 0, size)

    def root_with(self, leaf: bytes) -> Digest:
        """Root the tree would have after appending `leaf`, without mutating it."""
        self.append(leaf)
        try:
            return self.root()
        finally:
            self.truncate(self.leaf_count - 1)

    def get_proof(self, index: int, size: Optional[int] = None) -> MerkleProof:
        """
        Inclusion proof for leaf `index` against root(size).

        Raises:
            ProofRangeError: If index is not below size
        """
        size = self.leaf_count if size is None else size
        if size > self.leaf_count or not 0 <= index < size:
            raise ProofRangeError(f"leaf {index} outside tree of {size}")

        path = []
        for height in range(1, self._height(size) + 1):
            node = index >> height
            left_child, right_child = 2 * node, 2 * node + 1
            child_span = 1 << (height - 1)
            if right_child * child_span >= size:
                # promoted: no sibling at this level
                continue
            if (index >> (height - 1)) == left_child:
                path.append((Side.RIGHT, self._node(height - 1, right_child, size)))
            else:
                path.append((Side.LEFT, self._node(height - 1, left_child, size)))
        return MerkleProof(tuple(path))


def fold_proof(leaf: bytes, proof: MerkleProof) -> bytes:
    acc = bytes(leaf)
    for side, sibling in proof.path:
        if side == Side.LEFT:
            acc = hash_children(sibling, acc)
        else:
            acc = hash_children(acc, sibling)
    return acc


def verify_proof(leaf: bytes, proof: MerkleProof, root: bytes) -> bool:
    """True iff folding the path from `leaf` reproduces `root`."""
    try:
        return fold_proof(leaf, proof) == bytes(root)
    except (TypeError, ValueError):
        return False


def build_root(leaves: Sequence[bytes]) -> Digest:
    """Root by naive level-by-level pairing; the reference the cached tree must match."""
    if not leaves:
        raise EmptyTreeError("root of an empty tree")
    level = [bytes(leaf) for leaf in leaves]
    while len(level) > 1:
        paired = [
            hash_children(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)
        ]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return Digest(level[0])
