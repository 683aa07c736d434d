from .receipt import Receipt, endorsement_message, leaf_digest, verify_receipt
from .tree import (
    MerkleProof,
    MerkleState,
    Side,
    build_root,
    fold_proof,
    hash_children,
    verify_proof,
)
