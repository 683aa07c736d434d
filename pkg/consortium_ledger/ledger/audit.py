"""
Offline ledger audit.

Works on untrusted files and needs no ledger secret: every check uses public
data only. The audit replays public updates to follow node and service
identities, recomputes the Merkle tree, checks each signature entry against
it, and reconstructs governance history from the history and proposals_info
maps. Problems are reported as findings, never raised.

Processing stops at the first integrity error, so the reported violation is
the earliest one: for a frame that fails its own digest that is the frame
itself, for a signature that does not match the recomputed root it is the
first entry after the previous verified signature.
"""

import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from consortium_ledger.common.exceptions import ConsortiumLedgerError, EncodingError
from consortium_ledger.common.txid import GENESIS_PREDECESSOR, TransactionId
from consortium_ledger.crypto.primitives import ALGORITHM_SUITE, verify
from consortium_ledger.governance.model import ProposalInfo, SignedRequest
from consortium_ledger.kv.maps import HISTORY, MEMBERS_CERTS, PROPOSALS_INFO
from consortium_ledger.kv.records import read_node, read_service
from consortium_ledger.kv.store import StoreState
from consortium_ledger.kv.write_set import WriteSet
from consortium_ledger.ledger.chunks import FORMAT_VERSION, ChunkFile, read_ledger_files
from consortium_ledger.ledger.entry import EntryKind, LedgerEntry
from consortium_ledger.ledger.signatures import signature_payload
from consortium_ledger.merkle.receipt import endorsement_message
from consortium_ledger.merkle.tree import MerkleState

logger = logging.getLogger("consortium_ledger.ledger.audit")


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    # legal but worth knowing, e.g. entries after the last signature
    INFO = "info"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    message: str
    seqno: Optional[int] = None
    file: Optional[str] = None
    offset: Optional[int] = None


@dataclass(frozen=True)
class VerifiedSignature:
    txid: str
    signing_node: str
    root: str


@dataclass(frozen=True)
class GovernanceRecord:
    txid: str
    member_id: str
    kind: str
    request_digest: str
    signature_valid: bool


@dataclass
class AuditReport:
    files: int = 0
    entries: int = 0
    last_txid: str = str(GENESIS_PREDECESSOR)
    signatures: List[VerifiedSignature] = field(default_factory=list)
    governance: List[GovernanceRecord] = field(default_factory=list)
    proposals: Dict[str, str] = field(default_factory=dict)
    service_identities: List[str] = field(default_factory=list)
    findings: List[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(f.severity is Severity.ERROR for f in self.findings)

    @property
    def first_violation(self) -> Optional[Finding]:
        errors = [f for f in self.findings if f.severity is Severity.ERROR]
        return errors[0] if errors else None

    @property
    def last_verified_seqno(self) -> int:
        if not self.signatures:
            return 0
        return TransactionId.parse(self.signatures[-1].txid).seqno

    def to_dict(self) -> Dict[str, Any]:
        doc = asdict(self)
        doc["ok"] = self.ok
        doc["findings"] = [
            {**asdict(f), "severity": f.severity.value} for f in self.findings
        ]
        return doc


class _Auditor:
    def __init__(self, service_public_id: bytes):
        self.service_public_id = bytes(service_public_id)
        self.report = AuditReport()
        self.tree = MerkleState()
        self.state = StoreState()
        self.last = GENESIS_PREDECESSOR
        self.identity: Optional[bytes] = None
        self.identities: List[bytes] = []

    def error(self, message: str, seqno=None, chunk: ChunkFile = None, offset=None):
        self.report.findings.append(
            Finding(
                Severity.ERROR,
                message,
                seqno,
                chunk.path.name if chunk else None,
                offset,
            )
        )

    def warn(self, message: str, seqno=None, chunk: ChunkFile = None):
        self.report.findings.append(
            Finding(Severity.WARNING, message, seqno, chunk.path.name if chunk else None)
        )

    def note(self, message: str, seqno=None):
        self.report.findings.append(Finding(Severity.INFO, message, seqno))

    def check_chunk(self, chunk: ChunkFile) -> bool:
        header = chunk.header
        if header is None:
            self.error(f"unreadable header: {chunk.error.message}", self.last.seqno + 1, chunk, 0)
            return False
        if header.format_version != FORMAT_VERSION:
            self.error(f"unsupported format version {header.format_version}", self.last.seqno + 1, chunk, 0)
            return False
        if header.suite != ALGORITHM_SUITE:
            self.error(f"unexpected algorithm suite {header.suite}", self.last.seqno + 1, chunk, 0)
            return False
        if header.first_seqno != chunk.first_seqno or chunk.first_seqno != self.last.seqno + 1:
            self.error(
                f"chunk starts at {chunk.first_seqno}, expected {self.last.seqno + 1}",
                self.last.seqno + 1,
                chunk,
                0,
            )
            return False
        return True

    def check_entry(self, chunk: ChunkFile, entry: LedgerEntry, offset: int) -> bool:
        txid = entry.txid
        if txid.seqno != self.last.seqno + 1 or txid.view < self.last.view:
            self.error(f"entry {txid} does not follow {self.last}", self.last.seqno + 1, chunk, offset)
            return False

        try:
            leaf = entry.leaf
            updates = entry.public_updates()
        except ConsortiumLedgerError as e:
            self.error(f"undecodable entry {txid}: {e.message}", txid.seqno, chunk, offset)
            return False

        self.record_governance(entry, WriteSet(updates))
        self.tree.append(leaf)
        self.state.apply_updates(txid, updates)
        self.state.compact(txid.seqno)
        self.last = txid
        self.report.entries += 1

        if not self.track_service(txid.seqno, chunk, offset):
            return False
        if entry.kind is EntryKind.SIGNATURE:
            return self.check_signature(chunk, entry, offset)
        return True

    def track_service(self, seqno: int, chunk: ChunkFile, offset: int) -> bool:
        try:
            service = read_service(self.state)
        except (ConsortiumLedgerError, KeyError, ValueError) as e:
            self.error(f"malformed service record: {e}", seqno, chunk, offset)
            return False
        if service is None or service.identity == self.identity:
            return True
        if self.identity is not None and service.previous_identity != self.identity:
            self.error("service identity replaced without a link to its predecessor", seqno, chunk, offset)
            return False
        self.identity = service.identity
        self.identities.append(service.identity)
        return True

    def check_signature(self, chunk: ChunkFile, entry: LedgerEntry, offset: int) -> bool:
        txid = entry.txid
        first_unverified = self.report.last_verified_seqno + 1
        try:
            payload = signature_payload(entry)
        except ConsortiumLedgerError as e:
            self.error(f"signature {txid} unreadable: {e.message}", first_unverified, chunk, offset)
            return False

        if payload.merkle_root != self.tree.root():
            self.error(
                f"signature {txid} does not match the ledger since seqno {first_unverified}",
                first_unverified,
                chunk,
                offset,
            )
            return False
        if not payload.verify():
            self.error(f"invalid root signature at {txid}", first_unverified, chunk, offset)
            return False

        try:
            node = read_node(self.state, payload.signing_node)
        except (ConsortiumLedgerError, KeyError, ValueError):
            node = None
        if node is None or node.public_id != payload.signing_public_id:
            self.error(f"signer {payload.signing_node} of {txid} is not a known node", first_unverified, chunk, offset)
            return False
        if self.identity is None or not verify(
            self.identity, endorsement_message(node.public_id), node.endorsement
        ):
            self.error(f"signer {payload.signing_node} of {txid} is not endorsed by the service", first_unverified, chunk, offset)
            return False

        self.report.signatures.append(
            VerifiedSignature(str(txid), payload.signing_node, payload.merkle_root.hex())
        )
        return True

    def record_governance(self, entry: LedgerEntry, write_set: WriteSet) -> None:
        for update in write_set.updates():
            if update.map_name == HISTORY and update.value is not None:
                try:
                    request = SignedRequest.from_bytes(update.value)
                except EncodingError:
                    self.warn(f"unreadable governance request in {entry.txid}", entry.txid.seqno)
                    continue
                public_id = self.state.get(MEMBERS_CERTS, request.member_id.encode())
                self.report.governance.append(
                    GovernanceRecord(
                        txid=str(entry.txid),
                        member_id=request.member_id,
                        kind=request.kind.value,
                        request_digest=request.digest,
                        signature_valid=public_id is not None and request.verify(public_id),
                    )
                )
            elif update.map_name == PROPOSALS_INFO and update.value is not None:
                try:
                    info = ProposalInfo.from_bytes(update.value)
                except (ConsortiumLedgerError, KeyError, ValueError):
                    continue
                self.report.proposals[update.key.decode()] = info.state.value

    def finish(self) -> None:
        report = self.report
        report.last_txid = str(self.last)
        report.service_identities = [i.hex() for i in self.identities]

        for record in report.governance:
            if not record.signature_valid:
                self.error(
                    f"governance request by {record.member_id} in {record.txid} has an invalid signature",
                    TransactionId.parse(record.txid).seqno,
                )

        if self.identities and self.service_public_id not in self.identities:
            self.error("ledger was not produced under the given service identity")
        elif self.identities and self.identities[-1] != self.service_public_id:
            self.warn("ledger continues under a later service identity")

        tail_start = report.last_verified_seqno + 1
        if report.ok and self.last.seqno >= tail_start:
            self.note(
                f"{self.last.seqno - tail_start + 1} entries after the last signature "
                "could be rolled back without detection",
                tail_start,
            )


def audit_chunks(chunks: List[ChunkFile], service_public_id: bytes) -> AuditReport:
    auditor = _Auditor(service_public_id)
    auditor.report.files = len(chunks)
    if not chunks:
        auditor.error("no ledger files found")
        return auditor.report

    for chunk in chunks:
        if not auditor.check_chunk(chunk):
            break
        ok = True
        for frame in chunk.frames:
            if not frame.digest_ok:
                auditor.error(
                    f"entry digest mismatch at seqno {auditor.last.seqno + 1}",
                    auditor.last.seqno + 1,
                    chunk,
                    frame.offset,
                )
                ok = False
                break
            if not auditor.check_entry(chunk, frame.entry, frame.offset):
                ok = False
                break
        if ok and chunk.error is not None:
            auditor.error(
                f"undecodable frame: {chunk.error.message}",
                auditor.last.seqno + 1,
                chunk,
                chunk.error.offset,
            )
            ok = False
        if ok and chunk.frames and chunk.frames[-1].entry.txid.seqno != chunk.last_seqno:
            auditor.error(
                f"file name says it ends at {chunk.last_seqno}",
                auditor.last.seqno + 1,
                chunk,
            )
            ok = False
        if ok and not chunk.is_open and not chunk.frames[-1:]:
            auditor.error("empty chunk", auditor.last.seqno + 1, chunk)
            ok = False
        if ok and not chunk.is_open and not chunk.frames[-1].entry.is_signature:
            auditor.error("closed chunk does not end with a signature", auditor.last.seqno, chunk)
            ok = False
        if not ok:
            break

    auditor.finish()
    return auditor.report


def audit(directory: Union[str, Path], service_public_id: bytes) -> AuditReport:
    """Audit the chunk files in directory against a service identity."""
    report = audit_chunks(read_ledger_files(directory), service_public_id)
    logger.info(
        f"Audited {report.entries} entries in {report.files} files: "
        f"{len(report.signatures)} signatures verified, ok={report.ok}"
    )
    return report
