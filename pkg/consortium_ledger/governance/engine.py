"""
Governance request processing on the primary.

Proposals and ballots arrive as member-signed requests. The engine verifies
the signature against members.certs, records the request verbatim in the
history map, updates proposals / proposals_info, asks the constitution for a
decision and applies accepted proposals. All writes go into the caller's
privileged transaction, which becomes one ledger entry.
"""

import logging
from typing import Any, Dict, Optional

from consortium_ledger.common.encoding import canonical_json, parse_json
from consortium_ledger.common.exceptions import ConsortiumLedgerError, EncodingError
from consortium_ledger.governance.actions import ActionContext, apply_action
from consortium_ledger.governance.ballots import Ballot
from consortium_ledger.governance.constitution import ConstitutionFactory, load_constitution
from consortium_ledger.governance.model import (
    Proposal,
    ProposalInfo,
    ProposalState,
    RequestKind,
    SignedRequest,
)
from consortium_ledger.kv.maps import HISTORY, PROPOSALS, PROPOSALS_INFO
from consortium_ledger.kv.records import member_public_id
from consortium_ledger.result import ErrorType, OperationError, Result

logger = logging.getLogger("consortium_ledger.governance")


def _fail(error_type: ErrorType, message: str) -> Result[Dict[str, Any], OperationError]:
    return Result.failure(OperationError(error_type, message))


def read_proposal(reader, proposal_id: str) -> Optional[Proposal]:
    value = reader.get(PROPOSALS, proposal_id.encode())
    return Proposal.from_dict(parse_json(value)) if value is not None else None


def read_proposal_info(reader, proposal_id: str) -> Optional[ProposalInfo]:
    value = reader.get(PROPOSALS_INFO, proposal_id.encode())
    return ProposalInfo.from_bytes(value) if value is not None else None


def open_proposals(reader) -> Dict[str, ProposalInfo]:
    infos = {}
    for key, value in reader.items(PROPOSALS_INFO):
        info = ProposalInfo.from_bytes(value)
        if info.state is ProposalState.OPEN:
            infos[key.decode()] = info
    return infos


class GovernanceEngine:
    """
    Args:
        factory: Builds the constitution from its stored document
    """

    def __init__(self, factory: Optional[ConstitutionFactory] = None):
        self.factory = factory or ConstitutionFactory()

    def verify(self, tx, request: SignedRequest) -> Result[SignedRequest, OperationError]:
        public_id = member_public_id(tx, request.member_id)
        if public_id is None:
            return Result.failure(
                OperationError(ErrorType.UNKNOWN_MEMBER, f"{request.member_id} is not a member")
            )
        if not request.verify(public_id):
            return Result.failure(
                OperationError(ErrorType.BAD_SIGNATURE, f"bad signature from {request.member_id}")
            )
        return Result.success(request)

    def submit(
        self, tx, request: SignedRequest, ctx: ActionContext
    ) -> Result[Dict[str, Any], OperationError]:
        """
        Process a proposal or ballot.

        Returns:
            {"proposal_id", "state"} on success; nothing is written on failure
        """
        verified = self.verify(tx, request)
        if verified.is_failure():
            return verified
        try:
            body = request.parsed_body()
        except EncodingError as e:
            return _fail(ErrorType.INVALID_ARGUMENT, e.message)

        if request.kind is RequestKind.PROPOSAL:
            return self._propose(tx, request, body, ctx)
        if request.kind is RequestKind.BALLOT:
            return self._ballot(tx, request, body, ctx)
        return _fail(ErrorType.INVALID_ARGUMENT, f"{request.kind.value} is not a governance request")

    def _propose(self, tx, request, body, ctx) -> Result[Dict[str, Any], OperationError]:
        proposal_id = request.digest
        existing = read_proposal_info(tx, proposal_id)
        if existing is not None:
            return Result.success({"proposal_id": proposal_id, "state": existing.state.value})
        try:
            proposal = Proposal.from_dict(body)
        except EncodingError as e:
            return _fail(ErrorType.INVALID_ARGUMENT, e.message)

        tx.put(HISTORY, proposal_id.encode(), request.to_bytes())
        tx.put(PROPOSALS, proposal_id.encode(), canonical_json(proposal.to_dict()))
        info = ProposalInfo(proposer=request.member_id, state=ProposalState.OPEN)
        logger.info(f"Proposal {proposal_id[:12]} by {request.member_id}: {proposal.action_names()}")
        return Result.success(self._resolve(tx, proposal_id, proposal, info, ctx))

    def _ballot(self, tx, request, body, ctx) -> Result[Dict[str, Any], OperationError]:
        proposal_id = body.get("proposal_id")
        if not isinstance(proposal_id, str):
            return _fail(ErrorType.INVALID_ARGUMENT, "ballot names no proposal")
        info = read_proposal_info(tx, proposal_id)
        proposal = read_proposal(tx, proposal_id)
        if info is None or proposal is None:
            return _fail(ErrorType.UNKNOWN_PROPOSAL, f"no proposal {proposal_id}")
        if info.state.is_closed:
            return _fail(ErrorType.PROPOSAL_CLOSED, f"proposal is {info.state.value}")
        if request.member_id in info.ballots:
            return _fail(ErrorType.DUPLICATE_BALLOT, f"{request.member_id} already voted")
        try:
            ballot = Ballot.from_dict(body.get("ballot"))
        except ConsortiumLedgerError as e:
            return _fail(ErrorType.INVALID_ARGUMENT, e.message)

        tx.put(HISTORY, request.digest.encode(), request.to_bytes())
        info.ballots[request.member_id] = ballot.to_dict()
        return Result.success(self._resolve(tx, proposal_id, proposal, info, ctx))

    def _resolve(
        self, tx, proposal_id: str, proposal: Proposal, info: ProposalInfo, ctx: ActionContext
    ) -> Dict[str, Any]:
        votes = {}
        for member_id, doc in sorted(info.ballots.items()):
            vote = Ballot.from_dict(doc).evaluate(proposal, tx)
            if vote is not None:
                votes[member_id] = vote
        info.votes = votes
        info.state = load_constitution(tx, self.factory).resolve(
            proposal, info.proposer, votes, tx
        )

        if info.state is ProposalState.ACCEPTED:
            child = tx.nested()
            ctx.proposal_id = proposal_id
            ctx.invalidate_others = False
            try:
                for act in proposal.actions:
                    apply_action(child, act.name, act.args, ctx)
            except ConsortiumLedgerError as e:
                logger.warning(f"Proposal {proposal_id[:12]} failed: {e.message}")
                info.state = ProposalState.FAILED
                info.failure = e.message
            else:
                tx.merge_child(child)
                if ctx.invalidate_others:
                    self._invalidate_others(tx, proposal_id)
            logger.info(f"Proposal {proposal_id[:12]} is {info.state.value}")

        tx.put(PROPOSALS_INFO, proposal_id.encode(), info.to_bytes())
        return {"proposal_id": proposal_id, "state": info.state.value}

    def _invalidate_others(self, tx, proposal_id: str) -> None:
        for other_id, other in open_proposals(tx).items():
            if other_id == proposal_id:
                continue
            other.state = ProposalState.INVALIDATED
            tx.put(PROPOSALS_INFO, other_id.encode(), other.to_bytes())
