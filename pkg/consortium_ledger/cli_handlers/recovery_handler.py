"""
Handlers for `recover start` and `recover submit-share`.

`recover start` replays a previous service's ledger files into a new
one-node service in status Recovering and writes its ledger and identity.
`recover submit-share` is the member side: it finds the member's sealed
share in the public state of a ledger, opens it with the member's key and
writes the signed submission request.
"""

import logging
import random
from pathlib import Path
from typing import Any, Dict, Optional

import click

from consortium_ledger.common.exceptions import ConsortiumLedgerError, RecoveryError
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.kv.maps import RECOVERY_SHARES
from consortium_ledger.kv.store import StoreState
from consortium_ledger.ledger.chunks import read_ledger_files, write_ledger_files
from consortium_ledger.ledger.entry import public_write_set
from consortium_ledger.project_logging import console
from consortium_ledger.recovery import open_share, read_share_record, recovery_threshold
from consortium_ledger.recovery.recovery import (
    recoverable_entries,
    share_request,
    start_recovery,
)
from consortium_ledger.result import ErrorType, Result

from .base_handler import CommandHandler, CommandResult, error_from_exception
from .member_handler import read_member_key

logger = logging.getLogger("consortium_ledger.cli.recover")

# Same code as RecoveryError
RECOVERY_EXIT_CODE = 16


def replay_public_state(ledger_dir: str) -> StoreState:
    """Public state up to the last verified signature of the files in ledger_dir."""
    store = StoreState()
    for entry in recoverable_entries(read_ledger_files(ledger_dir)):
        store.apply(entry.txid, public_write_set(entry))
    return store


class RecoverStartCommandHandler(CommandHandler):
    def __init__(
        self,
        ledger_dir: str,
        out: str,
        node_id: str = "r0",
        seed: int = 0,
        committed_only: bool = False,
        output_format: str = "text",
        config: Optional[AppConfig] = None,
    ):
        """
        Args:
            ledger_dir: Ledger files of the previous service
            out: Directory for the recovered ledger and service_id
            node_id: Id of the recovery node
            seed: Seed of the new node's and service's keys
            committed_only: Stop at the last signature the files mark as committed
        """
        super().__init__(output_format, config)
        self.ledger_dir = ledger_dir
        self.out = out
        self.node_id = node_id
        self.seed = seed
        self.committed_only = committed_only

    def handle(self) -> CommandResult:
        try:
            node = start_recovery(
                self.ledger_dir,
                self.node_id,
                self.config,
                random.Random(f"{self.seed}:{self.node_id}"),
                committed_only=self.committed_only,
            )
        except RecoveryError as e:
            return Result.failure([error_from_exception(e, ErrorType.ACTION_FAILED)])
        except ConsortiumLedgerError as e:
            return Result.failure([error_from_exception(e, ErrorType.INVALID_ARGUMENT)])

        out = Path(self.out)
        entries = node.ledger.entries(node.ledger.start.seqno + 1)
        paths = write_ledger_files(entries, out, node.ledger.commit_seqno)
        (out / "service_id").write_text(node.service_identity.hex() + "\n", encoding="utf-8")
        (out / "previous_service_id").write_text(
            node.recovery.previous_identity.hex() + "\n", encoding="utf-8"
        )
        holders = [key.decode() for key, _ in node.store.items(RECOVERY_SHARES)]
        return Result.success(
            {
                "node": self.node_id,
                "recovered_seqno": node.recovery.recovered_seqno,
                "view": node.consensus.view,
                "service_identity": node.service_identity.hex(),
                "previous_identity": node.recovery.previous_identity.hex(),
                "status": node.service_status().value,
                "share_threshold": recovery_threshold(node.store),
                "share_holders": holders,
                "files": [p.name for p in paths],
                "out": str(out),
            }
        )

    def render_text(self, stats: Dict[str, Any]) -> None:
        console.print(
            f"[green]{stats['node']} recovered {stats['recovered_seqno']} entries "
            f"and starts view {stats['view']} as {stats['status']}[/green]"
        )
        console.print(f"New service identity: {stats['service_identity']}")
        console.print(f"Previous identity:    {stats['previous_identity']}")
        console.print(
            f"{stats['share_threshold']} of {len(stats['share_holders'])} recovery shares "
            f"({', '.join(stats['share_holders'])}) are needed to restore private state"
        )
        console.print(f"Ledger written to {stats['out']}")

    @classmethod
    def from_click_context(cls, ctx: click.Context) -> "RecoverStartCommandHandler":
        params = ctx.params
        config = cls.load_config(ctx)
        return cls(
            ledger_dir=params["ledger_dir"],
            out=params["out"],
            node_id=params.get("node_id") or "r0",
            seed=params.get("seed") or 0,
            committed_only=params.get("committed_only", False),
            output_format=params.get("format") or "text",
            config=config,
        )


class SubmitShareCommandHandler(CommandHandler):
    def __init__(
        self,
        ledger_dir: str,
        member_key: str,
        out: str,
        output_format: str = "text",
        config: Optional[AppConfig] = None,
    ):
        super().__init__(output_format, config)
        self.ledger_dir = ledger_dir
        self.member_key = member_key
        self.out = out

    def handle(self) -> CommandResult:
        try:
            member = read_member_key(self.member_key)
            store = replay_public_state(self.ledger_dir)
            record = read_share_record(store, member.member_id)
        except ConsortiumLedgerError as e:
            return Result.failure([error_from_exception(e, ErrorType.INVALID_ARGUMENT)])
        if record is None:
            return Result.failure(
                [
                    error_from_exception(
                        RecoveryError(f"the ledger holds no share for {member.member_id}"),
                        ErrorType.UNKNOWN_MEMBER,
                    )
                ]
            )

        opened = open_share(member.encryption, record)
        if opened.is_failure():
            error = opened.error()
            error.details = {**(error.details or {}), "exit_code": RECOVERY_EXIT_CODE}
            return Result.failure([error])

        request = share_request(member, opened.unwrap())
        out = Path(self.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(request.to_bytes())
        return Result.success(
            {
                "member": member.member_id,
                "share_index": record.index,
                "threshold": record.threshold,
                "request_digest": request.digest,
                "out": str(out),
            }
        )

    def render_text(self, stats: Dict[str, Any]) -> None:
        console.print(
            f"[green]Share {stats['share_index']} of {stats['member']} "
            f"(threshold {stats['threshold']}) written to {stats['out']}[/green]"
        )

    @classmethod
    def from_click_context(cls, ctx: click.Context) -> "SubmitShareCommandHandler":
        params = ctx.params
        config = cls.load_config(ctx)
        return cls(
            ledger_dir=params["ledger_dir"],
            member_key=params["member_key"],
            out=params["out"],
            output_format=params.get("format") or "text",
            config=config,
        )