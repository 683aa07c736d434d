"""
Share collection on a recovering node.

Submitted shares are held in memory only. Once at least threshold shares are
in, every threshold-sized combination of them is tried after each submission.
A corrupt share therefore cannot block genuine ones that arrive later; it is
only marked rejected once a working combination leaves it out.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from consortium_ledger.common.encoding import from_hex
from consortium_ledger.common.exceptions import EncodingError
from consortium_ledger.crypto.primitives import SymmetricSecret
from consortium_ledger.crypto.shamir import SecretShare
from consortium_ledger.kv.maps import LEDGER_SECRET, WRAPPED_SECRET_KEY
from consortium_ledger.recovery.secrets import recovery_threshold, search_ledger_secret
from consortium_ledger.result import ErrorType, OperationError, Result

logger = logging.getLogger("consortium_ledger.recovery")


def parse_share(body: dict) -> SecretShare:
    """
    Raises:
        EncodingError: If the body carries no well-formed share
    """
    try:
        doc = body["share"]
        return SecretShare(int(doc["index"]), from_hex(doc["payload"], "payload"))
    except (KeyError, TypeError, ValueError) as e:
        raise EncodingError(f"malformed recovery share: {e}")


def share_body(share: SecretShare) -> dict:
    return {"share": {"index": share.index, "payload": share.payload.hex()}}


@dataclass
class RecoverySession:
    """
    Args:
        recovered_seqno: Last seqno replayed from the previous service's files
        previous_identity: Public identity of the previous service
    """

    recovered_seqno: int
    previous_identity: bytes
    shares: Dict[str, SecretShare] = field(default_factory=dict)
    rejected: List[str] = field(default_factory=list)

    def submit(
        self, reader, member_id: str, share: SecretShare
    ) -> Result[Optional[SymmetricSecret], OperationError]:
        """
        Add one member's share.

        Returns:
            Success(None) while no combination unwraps the ledger secret,
            Success(secret) once one does, Failure if no shares were issued
        """
        threshold = recovery_threshold(reader)
        wrapped = reader.get(LEDGER_SECRET, WRAPPED_SECRET_KEY)
        if threshold is None or wrapped is None:
            return Result.failure(
                OperationError(ErrorType.SHARE_REJECTED, "no recovery shares were ever issued")
            )
        self.shares[member_id] = share
        if len(self.shares) < threshold:
            logger.info(f"Recovery share {len(self.shares)}/{threshold} from {member_id}")
            return Result.success(None)
        found = search_ledger_secret(wrapped, self.shares, threshold)
        if found.is_failure():
            logger.warning(
                f"No {threshold} of the {len(self.shares)} submitted shares unwrap the ledger secret"
            )
            return Result.success(None)
        secret, used = found.unwrap()
        self.rejected = sorted(set(self.shares) - set(used))
        if self.rejected:
            logger.warning(f"Rejected recovery shares from {self.rejected}")
        logger.info(f"Ledger secret recovered with the shares of {list(used)}")
        return Result.success(secret)

    @property
    def submitted(self) -> int:
        return len(self.shares)
