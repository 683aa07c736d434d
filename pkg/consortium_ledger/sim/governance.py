"""
Scripted member activity.

A RequestChain is a sequence of member-signed requests (a proposal, its
ballots, recovery shares) submitted one after the other through the gov
endpoint. Each request is built only when it is due, so it can refer to the
proposal id returned by an earlier step or to state that did not exist when
the chain was scheduled. Transient refusals are retried; a proposal that
closed meanwhile ends its remaining ballots.
"""

from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Optional

from consortium_ledger.common.exceptions import ConfigurationError, EncodingError
from consortium_ledger.governance.ballots import vote_against, vote_for
from consortium_ledger.governance.model import MemberIdentity, RequestKind, SignedRequest
from consortium_ledger.kv.endpoints import Request, Response, ResponseStatus
from consortium_ledger.kv.records import read_nodes
from consortium_ledger.node.node import GOVERNANCE_ENDPOINT
from consortium_ledger.project_logging import get_logger
from consortium_ledger.recovery.recovery import share_request
from consortium_ledger.recovery.secrets import open_share, read_share_record
from consortium_ledger.sim.scenario import GovernanceStep

if TYPE_CHECKING:
    from consortium_ledger.sim.simulator import Simulator

logger = get_logger("sim.governance")

RETRY_MS = 20.0
TIMEOUT_MS = 300.0
MAX_ATTEMPTS = 200

# Errors after which the request is pointless to repeat
_FINAL_ERRORS = ("PROPOSAL_CLOSED", "DUPLICATE_BALLOT")

RequestFactory = Callable[["RequestChain"], Optional[SignedRequest]]


class RequestChain:
    """
    Args:
        label: Name used in trace events
        sim: Transport and clock
        requests: Builders for each request, called when it is due; a
            builder returning None skips its step
        at_ms: When the first request becomes due
        ready: Extra condition checked before each request
        node: Node to talk to first; default the current primary
    """

    def __init__(
        self,
        label: str,
        sim: "Simulator",
        requests: List[RequestFactory],
        at_ms: float,
        ready: Optional[Callable[[], bool]] = None,
        node: Optional[str] = None,
    ):
        self.label = label
        self.sim = sim
        self.requests = requests
        self.at_ms = at_ms
        self.ready = ready
        self.node = node
        self.position = 0
        self.proposal_id: Optional[str] = None
        self.state: Optional[str] = None
        self.done = False
        self.failed = False
        self._sessions = 0
        self._session_id: Optional[str] = None
        self._request_id = 0
        self._outstanding: Optional[int] = None
        self._attempts = 0
        self._current: Optional[SignedRequest] = None

    def start(self) -> None:
        self.sim.schedule(self.at_ms, self.step)

    def _open_session(self, node: str) -> None:
        self._sessions += 1
        self.node = node
        self._session_id = f"gov:{self.label}/{self._sessions}"
        self.sim.register_session(self._session_id, self)

    def _retry(self, move: bool = False) -> None:
        self._attempts += 1
        if self._attempts >= MAX_ATTEMPTS:
            self.done = self.failed = True
            logger.warning(f"Governance chain {self.label} gave up at step {self.position}")
            self._record("gave-up")
            return
        if move:
            self.node = self._session_id = None
        self.sim.schedule(self.sim.now + RETRY_MS, self.step)

    def _record(self, phase: str, **fields: Any) -> None:
        self.sim.trace.record(
            {"type": "governance", "label": self.label, "phase": phase, "time": self.sim.now, **fields}
        )

    def step(self) -> None:
        if self.done:
            return
        if self.position >= len(self.requests):
            self.done = True
            return
        if self.ready is not None and not self.ready():
            self.sim.schedule(self.sim.now + RETRY_MS, self.step)
            return
        if self._current is None:
            self._current = self.requests[self.position](self)
            if self._current is None:
                self._advance()
                return
        if self.node not in self.sim.reachable_nodes():
            self.node = self._session_id = None
        if self._session_id is None:
            target = self.node or self.sim.primary_id() or self.sim.any_node()
            if target is None:
                self._retry()
                return
            self._open_session(target)

        self._request_id += 1
        request_id = self._request_id
        self._outstanding = request_id
        request = Request(GOVERNANCE_ENDPOINT, {"request": self._current.to_bytes().decode("utf-8")})
        self.sim.send_request(self.node, self._session_id, request_id, request)
        self.sim.schedule(self.sim.now + TIMEOUT_MS, lambda: self._on_timeout(request_id))

    def _advance(self) -> None:
        self.position += 1
        self._current = None
        self._attempts = 0
        self.sim.schedule(self.sim.now, self.step)

    def _on_timeout(self, request_id: int) -> None:
        if self._outstanding != request_id:
            return
        self._outstanding = None
        self._retry(move=True)

    def on_reply(self, request_id: int, response: Response) -> None:
        if self._outstanding != request_id:
            return
        self._outstanding = None
        kind = self._current.kind.value

        if response.ok:
            body = response.body if isinstance(response.body, dict) else {}
            if "proposal_id" in body:
                self.proposal_id = body["proposal_id"]
                previous, self.state = self.state, body.get("state")
                self._record(kind, member=self._current.member_id, state=self.state)
                if self.state != previous and self.state == "Accepted":
                    self._record("accepted", proposal_id=self.proposal_id)
                if self.state not in (None, "Open"):
                    self._skip_ballots()
            else:
                self._record(kind, member=self._current.member_id, **body)
            self._advance()
            return

        error = response.error or ""
        if any(code in error for code in _FINAL_ERRORS):
            self._advance()
            return
        logger.debug(f"Governance chain {self.label}: {response.status.value} {error}")
        self._retry(
            move=response.status
            in (
                ResponseStatus.UNAVAILABLE,
                ResponseStatus.SESSION_TERMINATED,
                ResponseStatus.NOT_PRIMARY,
            )
        )

    def _skip_ballots(self) -> None:
        """Drop ballot steps directly following the current one."""
        index = self.position + 1
        while index < len(self.requests) and getattr(self.requests[index], "is_ballot", False):
            del self.requests[index]


def _ballot_factory(member: MemberIdentity, approve: bool) -> RequestFactory:
    def build(chain: RequestChain) -> Optional[SignedRequest]:
        if chain.proposal_id is None:
            return None
        ballot = vote_for() if approve else vote_against()
        return SignedRequest.create(
            member,
            RequestKind.BALLOT,
            {"proposal_id": chain.proposal_id, "ballot": ballot.to_dict()},
        )

    build.is_ballot = True
    return build


def _proposal_factory(
    member: MemberIdentity, actions: Callable[[], List[Dict[str, Any]]], nonce: str
) -> RequestFactory:
    def build(chain: RequestChain) -> Optional[SignedRequest]:
        return SignedRequest.create(
            member, RequestKind.PROPOSAL, {"actions": actions(), "nonce": nonce}
        )

    return build


def proposal_chain(
    sim: "Simulator",
    label: str,
    at_ms: float,
    proposer: MemberIdentity,
    actions: Callable[[], List[Dict[str, Any]]],
    voters: List[MemberIdentity],
    approve: bool = True,
    ready: Optional[Callable[[], bool]] = None,
    node: Optional[str] = None,
) -> RequestChain:
    requests = [_proposal_factory(proposer, actions, label)]
    requests += [_ballot_factory(voter, approve) for voter in voters]
    return RequestChain(label, sim, requests, at_ms, ready=ready, node=node)


def resolve_labels(value: Any, labels: Dict[str, str]) -> Any:
    """Replace "@name" strings with the node recorded under that label."""
    if isinstance(value, str) and value.startswith("@"):
        return labels.get(value[1:], value)
    if isinstance(value, dict):
        return {k: resolve_labels(v, labels) for k, v in value.items()}
    if isinstance(value, list):
        return [resolve_labels(v, labels) for v in value]
    return value


def load_request_file(path: Path) -> SignedRequest:
    """
    Raises:
        ConfigurationError: If the file is missing or not a signed request
    """
    try:
        return SignedRequest.from_bytes(Path(path).read_bytes())
    except OSError as e:
        raise ConfigurationError(f"cannot read request file {path}: {e}")
    except EncodingError as e:
        raise ConfigurationError(f"{path} is not a signed request: {e.message}")


def _file_factory(request: SignedRequest) -> RequestFactory:
    def build(chain: RequestChain) -> Optional[SignedRequest]:
        return request

    build.is_ballot = request.kind is RequestKind.BALLOT
    return build


def scripted_chain(sim: "Simulator", step: GovernanceStep) -> RequestChain:
    """Chain for one governance step of a scenario."""

    def pending_admitted() -> bool:
        wanted = resolve_labels(step.after_pending, sim.labels)
        if any(node_id.startswith("@") for node_id in wanted):
            return False
        store = sim.primary_store()
        if store is None:
            return False
        known = read_nodes(store)
        return all(node_id in known for node_id in wanted)

    def actions() -> List[Dict[str, Any]]:
        return resolve_labels(step.actions, sim.labels)

    if step.request_files:
        requests = [_file_factory(load_request_file(path)) for path in step.request_files]
        return RequestChain(
            step.label,
            sim,
            requests,
            step.at_ms,
            ready=pending_admitted if step.after_pending else None,
        )
    return proposal_chain(
        sim,
        step.label,
        step.at_ms,
        sim.members[step.member],
        actions,
        [sim.members[v] for v in step.voters],
        approve=step.vote,
        ready=pending_admitted if step.after_pending else None,
    )


def open_service_chain(sim: "Simulator", node_ids: List[str]) -> RequestChain:
    """Trust every initial node but the first, then open the service."""
    member_ids = sorted(sim.members)
    majority = len(member_ids) // 2 + 1
    joiners = node_ids[1:]

    def all_admitted() -> bool:
        store = sim.primary_store()
        if store is None:
            return False
        known = read_nodes(store)
        return all(node_id in known for node_id in joiners)

    def actions() -> List[Dict[str, Any]]:
        trusted = [
            {"name": "transition_node_to_trusted", "args": {"node_id": node_id}}
            for node_id in joiners
        ]
        return trusted + [{"name": "transition_service_to_open", "args": {}}]

    return proposal_chain(
        sim,
        "open-service",
        0.0,
        sim.members[member_ids[0]],
        actions,
        [sim.members[m] for m in member_ids[:majority]],
        ready=all_admitted,
    )


def _share_factory(member: MemberIdentity, node_id: str) -> RequestFactory:
    def build(chain: RequestChain) -> Optional[SignedRequest]:
        node = chain.sim.nodes[node_id]
        record = read_share_record(node.store, member.member_id)
        if record is None:
            return None
        share = open_share(member.encryption, record)
        if share.is_failure():
            logger.warning(f"{member.member_id} cannot open its recovery share: {share.error()}")
            return None
        return share_request(member, share.unwrap())

    return build


def recovery_chain(
    sim: "Simulator",
    label: str,
    at_ms: float,
    node_id: str,
    previous_identity: bytes,
    next_identity: bytes,
    share_holders: List[str],
) -> RequestChain:
    """Approve a recovered service, then hand in recovery shares."""
    member_ids = sorted(sim.members)
    proposer = sim.members[member_ids[0]]

    def actions() -> List[Dict[str, Any]]:
        return [
            {
                "name": "transition_service_to_open",
                "args": {
                    "previous_identity": previous_identity.hex(),
                    "next_identity": next_identity.hex(),
                },
            }
        ]

    requests = [_proposal_factory(proposer, actions, label)]
    requests += [_ballot_factory(sim.members[m], True) for m in member_ids]
    requests += [_share_factory(sim.members[m], node_id) for m in share_holders]
    return RequestChain(label, sim, requests, at_ms, node=node_id)
