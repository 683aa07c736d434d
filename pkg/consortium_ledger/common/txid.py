from dataclasses import dataclass

from consortium_ledger.common.encoding import Reader, encode_u32, encode_u64
from consortium_ledger.common.exceptions import ValidationError


@dataclass(frozen=True, order=True)
class TransactionId:
    """
    A (view, seqno) pair naming a ledger position.

    Ordered lexicographically. TransactionId(0, 0) stands for "before genesis".
    """

    view: int
    seqno: int

    def __post_init__(self):
        if self.view < 0 or self.seqno < 0:
            raise ValidationError(f"negative component in {self.view}.{self.seqno}")

    def __str__(self) -> str:
        return f"{self.view}.{self.seqno}"

    def encode(self) -> bytes:
        """16-byte encoding used inside leaves and frames."""
        return encode_u64(self.view) + encode_u64(self.seqno)

    def nonce(self) -> bytes:
        """
        12-byte AEAD nonce: u32 view followed by u64 seqno.

        Injective for views below 2**32, which the ledger enforces on append.
        """
        return encode_u32(self.view) + encode_u64(self.seqno)

    @classmethod
    def decode(cls, reader: Reader) -> "TransactionId":
        view = reader.u64()
        seqno = reader.u64()
        return cls(view, seqno)

    @classmethod
    def parse(cls, text: str) -> "TransactionId":
        """Parse the "view.seqno" form used by the CLI and client traces."""
        try:
            view, seqno = text.strip().split(".")
            return cls(int(view), int(seqno))
        except ValueError:
            raise ValidationError(f"not a transaction id: {text!r}", field="txid")


GENESIS_PREDECESSOR = TransactionId(0, 0)
MAX_VIEW = 2**32 - 1
