"""
CLI patterns module for the consortium ledger CLI.

This module bridges the CLI commands in cli.py with the command handlers
in the cli_handlers package. Each function builds the handler from the
click context, runs it, prints the outcome and ends the command with the
handler's exit code.
"""

from typing import Any, Dict, Type

import click

from consortium_ledger.cli_handlers import (
    AuditCommandHandler,
    CommandHandler,
    KeygenCommandHandler,
    ProposeCommandHandler,
    RecoverStartCommandHandler,
    RunCommandHandler,
    SubmitShareCommandHandler,
    SweepCommandHandler,
    VerifyReceiptCommandHandler,
    VoteCommandHandler,
)


def _dispatch(handler_class: Type[CommandHandler], ctx: click.Context) -> Dict[str, Any]:
    handler = handler_class.from_click_context(ctx)
    result = handler.handle()
    stats = handler.handle_result(result)
    if not stats["success"]:
        ctx.exit(stats["exit_code"])
    return stats


def handle_run_command(ctx: click.Context) -> Dict[str, Any]:
    """
    Handle the run command.

    Args:
        ctx: Click context with command parameters

    Returns:
        Dictionary with success status and statistics
    """
    return _dispatch(RunCommandHandler, ctx)


def handle_audit_command(ctx: click.Context) -> Dict[str, Any]:
    """
    Handle the audit command.

    Args:
        ctx: Click context with command parameters

    Returns:
        Dictionary with success status and the audit report
    """
    return _dispatch(AuditCommandHandler, ctx)


def handle_verify_receipt_command(ctx: click.Context) -> Dict[str, Any]:
    return _dispatch(VerifyReceiptCommandHandler, ctx)


def handle_sweep_command(ctx: click.Context) -> Dict[str, Any]:
    """
    Handle the sweep command.

    Args:
        ctx: Click context with command parameters

    Returns:
        Dictionary with success status and per-value summary
    """
    return _dispatch(SweepCommandHandler, ctx)


def handle_recover_start_command(ctx: click.Context) -> Dict[str, Any]:
    return _dispatch(RecoverStartCommandHandler, ctx)


def handle_submit_share_command(ctx: click.Context) -> Dict[str, Any]:
    return _dispatch(SubmitShareCommandHandler, ctx)


def handle_keygen_command(ctx: click.Context) -> Dict[str, Any]:
    return _dispatch(KeygenCommandHandler, ctx)


def handle_propose_command(ctx: click.Context) -> Dict[str, Any]:
    return _dispatch(ProposeCommandHandler, ctx)


def handle_vote_command(ctx: click.Context) -> Dict[str, Any]:
    return _dispatch(VoteCommandHandler, ctx)
