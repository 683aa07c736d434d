"""
Recovery shares and share collection.

start_recovery lives in consortium_ledger.recovery.recovery; it builds on the
node module, which itself uses this package.
"""

from consortium_ledger.recovery.secrets import (
    ShareRecord,
    issue_shares,
    open_share,
    read_share_record,
    recovery_threshold,
    search_ledger_secret,
    unwrap_ledger_secret,
)
from consortium_ledger.recovery.session import RecoverySession, parse_share, share_body

__all__ = [
    "RecoverySession",
    "ShareRecord",
    "issue_shares",
    "open_share",
    "parse_share",
    "read_share_record",
    "recovery_threshold",
    "search_ledger_secret",
    "share_body",
    "unwrap_ledger_secret",
]
