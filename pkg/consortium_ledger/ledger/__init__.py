from .audit import AuditReport, Finding, Severity, audit, audit_chunks
from .chunks import load_entries, read_ledger_files, write_ledger_files
from .entry import EntryKind, LedgerEntry, build_entry, decode_entry, open_entry
from .ledger import Ledger
from .signatures import SignaturePayload, make_signature_entry, signature_payload
from .status import TransactionStatus, evaluate_status
