"""
Messages exchanged between node cores.

Every message carries the sender's id and current view. Ledger entries travel
as LedgerEntry objects; the simulator never inspects their contents.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

from consortium_ledger.common.txid import TransactionId
from consortium_ledger.kv.endpoints import Request, Response
from consortium_ledger.ledger.entry import LedgerEntry


@dataclass(frozen=True)
class Message:
    sender: str
    view: int

    @property
    def kind(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class AppendEntries(Message):
    prev_txid: TransactionId
    entries: Tuple[LedgerEntry, ...]
    commit_seqno: int

    @property
    def last_seqno(self) -> int:
        return self.prev_txid.seqno + len(self.entries)


@dataclass(frozen=True)
class AppendEntriesResponse(Message):
    success: bool
    # Matched seqno on success, latest believed common seqno otherwise.
    # None when the sender's view was stale or the receiver has retired.
    last_seqno: Optional[int]
    commit_seqno: int = 0


@dataclass(frozen=True)
class RequestVote(Message):
    last_signature_txid: TransactionId


@dataclass(frozen=True)
class RequestVoteResponse(Message):
    granted: bool


@dataclass(frozen=True)
class InstallSnapshot(Message):
    snapshot: bytes
    snapshot_seqno: int


@dataclass(frozen=True)
class JoinRequest(Message):
    public_id: bytes
    code_id: str


@dataclass(frozen=True)
class JoinResponse(Message):
    accepted: bool
    reason: Optional[str] = None
    primary_hint: Optional[str] = None
    service_secret: Optional[bytes] = field(default=None, repr=False)
    ledger_secret: Optional[bytes] = field(default=None, repr=False)
    snapshot: Optional[bytes] = field(default=None, repr=False)


@dataclass(frozen=True)
class ForwardedRequest(Message):
    session_id: str
    request_id: int
    request: Request


@dataclass(frozen=True)
class ForwardedResponse(Message):
    session_id: str
    request_id: int
    response: Response
