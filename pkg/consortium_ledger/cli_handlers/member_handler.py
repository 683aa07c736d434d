"""
Member tooling: `keygen`, `propose` and `vote`.

Key files are JSON documents holding a member's private signing and
encryption secrets. Requests are written in the canonical signed request
encoding accepted by the gov endpoint, so scenario governance steps can
submit them through `request_files`. A proposal's id is the digest of its
request file, which lets ballots be prepared before anything is submitted.
"""

import json
import logging
import random
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import click

from consortium_ledger.common.exceptions import (
    ConfigurationError,
    ConsortiumLedgerError,
    EncodingError,
    ValidationError,
)
from consortium_ledger.config.config_manager import read_structured_file
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.governance.actions import ACTIONS
from consortium_ledger.governance.ballots import Ballot, vote_against, vote_for
from consortium_ledger.governance.model import MemberIdentity, RequestKind, SignedRequest
from consortium_ledger.project_logging import console
from consortium_ledger.result import ErrorType, Result

from .base_handler import CommandHandler, CommandResult, error_from_exception

logger = logging.getLogger("consortium_ledger.cli.member")


def read_member_key(path: Union[str, Path]) -> MemberIdentity:
    """
    Raises:
        ValidationError: If the file is not a member key file
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return MemberIdentity.from_dict(doc)
    except (OSError, ValueError) as e:
        raise ValidationError(f"cannot read member key {path}: {e}", "member_key")
    except EncodingError as e:
        raise ValidationError(f"{path}: {e.message}", "member_key")


def read_actions(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """
    Actions file: a list of {"name", "args"} objects, or an object with an
    "actions" list, in YAML, JSON or TOML.

    Raises:
        ConfigurationError: If the file is unreadable or names unknown actions
    """
    doc = read_structured_file(Path(path))
    actions = doc.get("actions") if isinstance(doc, dict) else doc
    if not isinstance(actions, list) or not actions:
        raise ConfigurationError(f"{path} holds no list of actions", "actions")
    for action in actions:
        if not isinstance(action, dict) or action.get("name") not in ACTIONS:
            raise ConfigurationError(f"unknown action {action!r} in {path}", "actions")
        action.setdefault("args", {})
    return actions


def _write_request(request: SignedRequest, out: Union[str, Path]) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(request.to_bytes())
    return out


class KeygenCommandHandler(CommandHandler):
    def __init__(
        self,
        member_id: str,
        out: str,
        seed: Optional[int] = None,
        output_format: str = "text",
        config: Optional[AppConfig] = None,
    ):
        """
        Args:
            member_id: Member the keys belong to
            out: Private key file to write
            seed: Derive the keys the way the simulator derives its members'
                keys for a scenario with this seed; default draws them from
                the operating system
        """
        super().__init__(output_format, config)
        self.member_id = member_id
        self.out = out
        self.seed = seed

    def handle(self) -> CommandResult:
        if self.seed is None:
            rng: random.Random = random.SystemRandom()
        else:
            rng = random.Random(f"{self.seed}:{self.member_id}")
        member = MemberIdentity.generate(self.member_id, rng)
        out = Path(self.out)
        try:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(json.dumps(member.to_dict(), indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            return Result.failure(
                [error_from_exception(ValidationError(str(e), "out"), ErrorType.INVALID_ARGUMENT)]
            )
        return Result.success({**member.public_record(), "out": str(out)})

    def render_text(self, stats: Dict[str, Any]) -> None:
        console.print(f"[green]Keys for {stats['member_id']} written to {stats['out']}[/green]")
        console.print(f"Signing public id:     {stats['public_id']}")
        console.print(f"Encryption public key: {stats['encryption_public_key']}")

    @classmethod
    def from_click_context(cls, ctx: click.Context) -> "KeygenCommandHandler":
        params = ctx.params
        config = cls.load_config(ctx)
        return cls(
            member_id=params["member_id"],
            out=params["out"],
            seed=params.get("seed"),
            output_format=params.get("format") or "text",
            config=config,
        )


class ProposeCommandHandler(CommandHandler):
    def __init__(
        self,
        member_key: str,
        actions: str,
        out: str,
        nonce: Optional[str] = None,
        output_format: str = "text",
        config: Optional[AppConfig] = None,
    ):
        """
        Args:
            member_key: Proposer's key file
            actions: Actions file
            out: Signed proposal file to write
            nonce: Distinguishes otherwise identical proposals
        """
        super().__init__(output_format, config)
        self.member_key = member_key
        self.actions = actions
        self.out = out
        self.nonce = nonce

    def handle(self) -> CommandResult:
        try:
            member = read_member_key(self.member_key)
            actions = read_actions(self.actions)
        except ConsortiumLedgerError as e:
            return Result.failure([error_from_exception(e, ErrorType.INVALID_ARGUMENT)])
        body: Dict[str, Any] = {"actions": actions}
        if self.nonce:
            body["nonce"] = self.nonce
        request = SignedRequest.create(member, RequestKind.PROPOSAL, body)
        out = _write_request(request, self.out)
        return Result.success(
            {
                "member": member.member_id,
                "proposal_id": request.digest,
                "actions": [a["name"] for a in actions],
                "out": str(out),
            }
        )

    def render_text(self, stats: Dict[str, Any]) -> None:
        console.print(
            f"[green]Proposal by {stats['member']} written to {stats['out']}[/green]"
        )
        console.print(f"Actions: {', '.join(stats['actions'])}")
        console.print(f"Proposal id: {stats['proposal_id']}")

    @classmethod
    def from_click_context(cls, ctx: click.Context) -> "ProposeCommandHandler":
        params = ctx.params
        config = cls.load_config(ctx)
        return cls(
            member_key=params["member_key"],
            actions=params["actions"],
            out=params["out"],
            nonce=params.get("nonce"),
            output_format=params.get("format") or "text",
            config=config,
        )


class VoteCommandHandler(CommandHandler):
    def __init__(
        self,
        member_key: str,
        out: str,
        proposal_id: Optional[str] = None,
        proposal: Optional[str] = None,
        approve: bool = True,
        ballot: Optional[str] = None,
        output_format: str = "text",
        config: Optional[AppConfig] = None,
    ):
        """
        Args:
            member_key: Voter's key file
            out: Signed ballot file to write
            proposal_id: Proposal voted on
            proposal: Signed proposal file, instead of proposal_id
            approve: For or against, when no ballot file is given
            ballot: File with a conditional ballot document
        """
        super().__init__(output_format, config)
        self.member_key = member_key
        self.out = out
        self.proposal_id = proposal_id
        self.proposal = proposal
        self.approve = approve
        self.ballot = ballot

    def _proposal_id(self) -> str:
        if self.proposal:
            try:
                request = SignedRequest.from_bytes(Path(self.proposal).read_bytes())
            except OSError as e:
                raise ValidationError(str(e), "proposal")
            if request.kind is not RequestKind.PROPOSAL:
                raise ValidationError(f"{self.proposal} is not a proposal", "proposal")
            return request.digest
        if not self.proposal_id:
            raise ValidationError("give --proposal-id or --proposal", "proposal_id")
        return self.proposal_id

    def handle(self) -> CommandResult:
        try:
            member = read_member_key(self.member_key)
            proposal_id = self._proposal_id()
            if self.ballot:
                ballot = Ballot.from_dict(read_structured_file(Path(self.ballot)))
            else:
                ballot = vote_for() if self.approve else vote_against()
        except ConsortiumLedgerError as e:
            return Result.failure([error_from_exception(e, ErrorType.INVALID_ARGUMENT)])
        request = SignedRequest.create(
            member,
            RequestKind.BALLOT,
            {"proposal_id": proposal_id, "ballot": ballot.to_dict()},
        )
        out = _write_request(request, self.out)
        return Result.success(
            {
                "member": member.member_id,
                "proposal_id": proposal_id,
                "ballot": ballot.to_dict(),
                "out": str(out),
            }
        )

    def render_text(self, stats: Dict[str, Any]) -> None:
        console.print(
            f"[green]Ballot by {stats['member']} on {stats['proposal_id'][:12]} "
            f"written to {stats['out']}[/green]"
        )

    @classmethod
    def from_click_context(cls, ctx: click.Context) -> "VoteCommandHandler":
        params = ctx.params
        config = cls.load_config(ctx)
        return cls(
            member_key=params["member_key"],
            out=params["out"],
            proposal_id=params.get("proposal_id"),
            proposal=params.get("proposal"),
            approve=not params.get("against", False),
            ballot=params.get("ballot"),
            output_format=params.get("format") or "text",
            config=config,
        )
