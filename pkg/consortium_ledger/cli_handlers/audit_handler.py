"""
Handlers for the offline checks: `audit` and `verify-receipt`.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import click

from consortium_ledger.common.exceptions import ConsortiumLedgerError
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.ledger.audit import audit
from consortium_ledger.merkle.receipt import Receipt, verify_receipt
from consortium_ledger.project_logging import console
from consortium_ledger.result import ErrorType, Result

from .base_handler import (
    CommandHandler,
    CommandResult,
    error_from_exception,
    read_service_id,
)

logger = logging.getLogger("consortium_ledger.cli.audit")

# Same codes as LedgerIntegrityError and CryptoError
AUDIT_FAILED_EXIT_CODE = 13
RECEIPT_REJECTED_EXIT_CODE = 10


def _service_id_file(ledger_dir: str, service_id: Optional[str]) -> Path:
    """Explicit file, else the service_id written next to the ledger by `run`."""
    if service_id:
        return Path(service_id)
    return Path(ledger_dir) / "service_id"


class AuditCommandHandler(CommandHandler):
    def __init__(
        self,
        ledger_dir: str,
        service_id: Optional[str] = None,
        output_format: str = "text",
        config: Optional[AppConfig] = None,
    ):
        super().__init__(output_format, config)
        self.ledger_dir = ledger_dir
        self.service_id = service_id

    def handle(self) -> CommandResult:
        try:
            identity = read_service_id(_service_id_file(self.ledger_dir, self.service_id))
            report = audit(self.ledger_dir, identity)
        except ConsortiumLedgerError as e:
            return Result.failure([error_from_exception(e, ErrorType.INVALID_ARGUMENT)])

        stats: Dict[str, Any] = report.to_dict()
        stats["last_verified_seqno"] = report.last_verified_seqno
        stats["success"] = report.ok
        stats["exit_code"] = 0 if report.ok else AUDIT_FAILED_EXIT_CODE
        return Result.success(stats)

    def render_text(self, stats: Dict[str, Any]) -> None:
        console.print(
            f"{stats['entries']} entries in {stats['files']} files, "
            f"{len(stats['signatures'])} signatures verified up to seqno "
            f"{stats['last_verified_seqno']}, {len(stats['governance'])} governance requests"
        )
        for finding in stats["findings"]:
            colour = {"error": "red", "warning": "yellow"}.get(finding["severity"], "cyan")
            where = []
            if finding.get("seqno") is not None:
                where.append(f"seqno {finding['seqno']}")
            if finding.get("file"):
                where.append(finding["file"])
            if finding.get("offset") is not None:
                where.append(f"offset {finding['offset']}")
            location = f" ({', '.join(where)})" if where else ""
            console.print(
                f"{finding['severity'].upper()}: {finding['message']}{location}",
                style=colour,
                markup=False,
            )
        if stats["success"]:
            console.print("[green]Ledger verified[/green]")
        else:
            console.print("[red]Ledger verification failed[/red]")

    @classmethod
    def from_click_context(cls, ctx: click.Context) -> "AuditCommandHandler":
        params = ctx.params
        config = cls.load_config(ctx)
        return cls(
            ledger_dir=params["ledger_dir"],
            service_id=params.get("service_id"),
            output_format=params.get("format") or "text",
            config=config,
        )


class VerifyReceiptCommandHandler(CommandHandler):
    def __init__(
        self,
        receipt: str,
        service_id: str,
        output_format: str = "text",
        config: Optional[AppConfig] = None,
    ):
        super().__init__(output_format, config)
        self.receipt = receipt
        self.service_id = service_id

    def handle(self) -> CommandResult:
        try:
            identity = read_service_id(self.service_id)
            receipt = Receipt.from_text(Path(self.receipt).read_text(encoding="utf-8"))
        except ConsortiumLedgerError as e:
            return Result.failure([error_from_exception(e, ErrorType.INVALID_ARGUMENT)])

        valid = verify_receipt(receipt, identity)
        logger.info(f"Receipt for {receipt.txid}: valid={valid}")
        return Result.success(
            {
                "success": valid,
                "exit_code": 0 if valid else RECEIPT_REJECTED_EXIT_CODE,
                "txid": str(receipt.txid),
                "signature_txid": str(receipt.signature_txid),
                "root": receipt.root.hex(),
                "valid": valid,
            }
        )

    def render_text(self, stats: Dict[str, Any]) -> None:
        if stats["valid"]:
            console.print(
                f"[green]Receipt for {stats['txid']} is valid "
                f"(signed at {stats['signature_txid']})[/green]"
            )
        else:
            console.print(f"[red]Receipt for {stats['txid']} does not verify[/red]")

    @classmethod
    def from_click_context(cls, ctx: click.Context) -> "VerifyReceiptCommandHandler":
        params = ctx.params
        config = cls.load_config(ctx)
        return cls(
            receipt=params["receipt"],
            service_id=params["service_id"],
            output_format=params.get("format") or "text",
            config=config,
        )
