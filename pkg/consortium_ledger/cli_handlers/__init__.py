"""
CLI command handlers for consortium ledger.

One handler class per command; each is created from a click context and
reports through a Result.
"""

from .audit_handler import AuditCommandHandler, VerifyReceiptCommandHandler
from .base_handler import CommandHandler, read_service_id
from .member_handler import (
    KeygenCommandHandler,
    ProposeCommandHandler,
    VoteCommandHandler,
    read_actions,
    read_member_key,
)
from .recovery_handler import RecoverStartCommandHandler, SubmitShareCommandHandler
from .run_handler import RunCommandHandler
from .sweep_handler import SweepCommandHandler, parse_param, tradeoff_holds

__all__ = [
    "AuditCommandHandler",
    "CommandHandler",
    "KeygenCommandHandler",
    "ProposeCommandHandler",
    "RecoverStartCommandHandler",
    "RunCommandHandler",
    "SubmitShareCommandHandler",
    "SweepCommandHandler",
    "VerifyReceiptCommandHandler",
    "VoteCommandHandler",
    "parse_param",
    "read_actions",
    "read_member_key",
    "read_service_id",
    "tradeoff_holds",
]
