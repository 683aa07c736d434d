"""
A service node: ledger, store and consensus core wired together.

The node is driven entirely from outside. The simulator (or a test) calls
tick(), receive() and client_request() with the current simulated time and
afterwards drains outgoing messages, client replies and trace events.
"""

import logging
import random
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from consortium_ledger.common.encoding import canonical_json, from_hex
from consortium_ledger.common.exceptions import (
    ConsensusInvariantError,
    ConsortiumLedgerError,
    LedgerIntegrityError,
    SnapshotError,
)
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.consensus.configurations import ActiveConfigurations, Configuration
from consortium_ledger.consensus.core import ConsensusCore, Role, StateMachine
from consortium_ledger.consensus.messages import (
    AppendEntries,
    ForwardedRequest,
    ForwardedResponse,
    JoinRequest,
    JoinResponse,
    Message,
)
from consortium_ledger.crypto.primitives import KeyPair, SymmetricSecret, sign
from consortium_ledger.governance.actions import ActionContext
from consortium_ledger.governance.constitution import ConstitutionFactory, store_constitution
from consortium_ledger.governance.engine import GovernanceEngine
from consortium_ledger.governance.model import RequestKind, SignedRequest
from consortium_ledger.kv.endpoints import (
    Application,
    LoggingApp,
    Request,
    Response,
    ResponseStatus,
    execute_endpoint,
)
from consortium_ledger.kv.maps import (
    EVIDENCE_KEY,
    LEDGER_SECRET,
    MEMBERS_CERTS,
    MEMBERS_KEYS,
    NODES_CODE_IDS,
    NODES_INFO,
    SNAPSHOT_EVIDENCE,
    USERS_CERTS,
    WRAPPED_SECRET_KEY,
)
from consortium_ledger.kv.records import (
    ALLOWED_TO_JOIN,
    NodeInfo,
    NodeStatus,
    ServiceInfo,
    ServiceStatus,
    code_id_allowed,
    read_node,
    read_nodes,
    read_service,
    trusted_nodes,
    write_node,
    write_service,
    write_service_config,
)
from consortium_ledger.kv.snapshot import restore_snapshot
from consortium_ledger.kv.store import StoreState
from consortium_ledger.kv.transaction import Tx
from consortium_ledger.kv.write_set import WriteSet
from consortium_ledger.ledger.entry import EntryKind, LedgerEntry, build_entry, open_entry
from consortium_ledger.ledger.ledger import Ledger
from consortium_ledger.ledger.signatures import make_signature_entry
from consortium_ledger.ledger.status import evaluate_status
from consortium_ledger.merkle.receipt import Receipt, endorsement_message
from consortium_ledger.node.receipts import build_receipt
from consortium_ledger.node.snapshots import SnapshotManager
from consortium_ledger.recovery.secrets import issue_shares, recovery_threshold
from consortium_ledger.recovery.session import RecoverySession, parse_share
from consortium_ledger.result import ErrorType, OperationError, Result

logger = logging.getLogger("consortium_ledger.node")

DEFAULT_CODE_ID = "consortium-ledger-node-1"

# Built-in endpoints every node serves without forwarding
TX_STATUS_ENDPOINT = "tx"
RECEIPT_ENDPOINT = "receipt"
GOVERNANCE_ENDPOINT = "gov"


@dataclass(frozen=True)
class ClientReply:
    session_id: str
    request_id: int
    response: Response


def _entry_kind(write_set: WriteSet, default: EntryKind) -> EntryKind:
    """RECONFIGURATION for any write that moves a node out of PENDING."""
    for update in write_set:
        if update.map_name == NODES_INFO and update.value is not None:
            if NodeInfo.from_bytes(update.value).status is not NodeStatus.PENDING:
                return EntryKind.RECONFIGURATION
    return default


class NodeCore(StateMachine):
    """
    Args:
        node_id: Node id, unique for the lifetime of the service
        identity: Node signing key
        config: Protocol configuration
        rng: Source of all randomness used by this node
        app: Application served to users
        code_id: Code identity presented when joining
        now: Simulated time at creation
    """

    def __init__(
        self,
        node_id: str,
        identity: KeyPair,
        config: AppConfig,
        rng: random.Random,
        app: Optional[Application] = None,
        code_id: str = DEFAULT_CODE_ID,
        now: float = 0.0,
    ):
        self.node_id = node_id
        self.identity = identity
        self.config = config
        self.rng = rng
        self.app = app or LoggingApp()
        self.code_id = code_id
        self.now = now

        self.ledger = Ledger()
        self.store = StoreState()
        self.ledger_secret: Optional[SymmetricSecret] = None
        self.service_key: Optional[KeyPair] = None
        self.governance = GovernanceEngine(ConstitutionFactory())
        self.snapshots = SnapshotManager(node_id)
        self.consensus = ConsensusCore(node_id, self, config.consensus, rng, now=now)
        self.recovery: Optional[RecoverySession] = None

        self.outbox: List[Tuple[str, Message]] = []
        self.client_outbox: List[ClientReply] = []
        self.events: List[dict] = []

        # session id -> primary the session's requests were forwarded to
        self.sessions: Dict[str, str] = {}
        self.joining = False
        self.join_targets: List[str] = []
        self._join_attempt = 0
        self._next_join_at = now
        self.retired = False
        self._retired_at: Optional[int] = None
        # node id -> seqno of the entry that moved it from RETIRING to RETIRED
        self.retirements: Dict[str, int] = {}
        self.last_signature_time = now
        self._housekeeping_due = False

    # -- construction ----------------------------------------------------------

    @classmethod
    def create_service(
        cls,
        node_id: str,
        config: AppConfig,
        rng: random.Random,
        members: Sequence[Dict[str, str]],
        users: Optional[Dict[str, bytes]] = None,
        constitution: Optional[Dict[str, Any]] = None,
        share_threshold: Optional[int] = None,
        code_ids: Iterable[str] = (DEFAULT_CODE_ID,),
        app: Optional[Application] = None,
        now: float = 0.0,
    ) -> "NodeCore":
        """
        Start a new service with this node as its only trusted node.

        The genesis configuration is written in one signature entry at
        (1, 1), committed immediately. The service starts Opening.

        Args:
            members: Public member records (member_id, public_id, encryption_public_key)
            users: user id -> public id
            constitution: Constitution document, default majority
            share_threshold: Shares needed to recover, default a majority of members
        """
        node = cls(node_id, KeyPair.generate(rng), config, rng, app=app, now=now)
        node.service_key = KeyPair.generate(rng)
        node.ledger_secret = SymmetricSecret.generate(rng)

        tx = Tx(node.store, privileged=True)
        for record in members:
            member_id = record["member_id"].encode()
            tx.put(MEMBERS_CERTS, member_id, from_hex(record["public_id"], "public_id"))
            tx.put(
                MEMBERS_KEYS,
                member_id,
                from_hex(record["encryption_public_key"], "encryption_public_key"),
            )
        for user_id, public_id in (users or {}).items():
            tx.put(USERS_CERTS, user_id.encode(), public_id)
        for code_id in code_ids:
            tx.put(NODES_CODE_IDS, code_id.encode(), canonical_json(ALLOWED_TO_JOIN))
        store_constitution(tx, ConstitutionFactory().create(constitution or {"name": "majority"}))
        threshold = share_threshold or len(members) // 2 + 1
        write_service_config(tx, {"recovery_threshold": threshold})
        write_node(tx, node_id, node._own_record(NodeStatus.TRUSTED))
        write_service(tx, ServiceInfo(ServiceStatus.OPENING, node.service_key.public_id))
        if members:
            issue_shares(tx, node.ledger_secret, threshold, rng)

        node.consensus.bootstrap_primary(1)
        txid = node.consensus.next_txid()
        entry, _ = make_signature_entry(
            txid, node.ledger.tree, node.identity, node_id, [(txid.view, txid.seqno)], tx.write_set
        )
        node.consensus.append_local(entry)
        node.last_signature_time = now
        node._after_step()
        logger.info(f"{node_id} started a service at {txid}")
        return node

    @classmethod
    def join_service(
        cls,
        node_id: str,
        config: AppConfig,
        rng: random.Random,
        peers: Sequence[str],
        app: Optional[Application] = None,
        code_id: str = DEFAULT_CODE_ID,
        now: float = 0.0,
    ) -> "NodeCore":
        """A fresh node that keeps asking peers to let it join."""
        node = cls(node_id, KeyPair.generate(rng), config, rng, app=app, code_id=code_id, now=now)
        node.joining = True
        node.join_targets = list(peers)
        return node

    @classmethod
    def resume_from_disk(cls, *args, **kwargs) -> "NodeCore":
        """
        Raises:
            ConsensusInvariantError: Always; a node that lost its memory must
                rejoin under a new identity
        """
        raise ConsensusInvariantError(
            "a restarted node cannot resume from its ledger files; join again as a new node"
        )

    def _own_record(self, status: NodeStatus) -> NodeInfo:
        return NodeInfo(
            status,
            self.identity.public_id,
            self.code_id,
            sign(self.service_key, endorsement_message(self.identity.public_id)),
        )

    # -- views of state --------------------------------------------------------

    @property
    def is_primary(self) -> bool:
        return self.consensus.is_primary

    @property
    def role(self) -> Role:
        return self.consensus.role

    @property
    def service_identity(self) -> Optional[bytes]:
        return self.service_key.public_id if self.service_key else None

    def service_status(self) -> Optional[ServiceStatus]:
        service = read_service(self.store)
        return service.status if service else None

    def node_status(self) -> Optional[NodeStatus]:
        info = read_node(self.store, self.node_id)
        return info.status if info else None

    def receipt_for(self, txid: TransactionId) -> Result[Receipt, OperationError]:
        return build_receipt(self.ledger, self.store, txid)

    # -- StateMachine ----------------------------------------------------------

    def on_append(
        self, entry: LedgerEntry, write_set: Optional[WriteSet] = None
    ) -> Optional[FrozenSet[str]]:
        if write_set is None:
            opened = open_entry(entry, self.ledger_secret)
            if opened.is_failure():
                raise LedgerIntegrityError(str(opened.error()), seqno=entry.txid.seqno)
            write_set = opened.unwrap()

        if write_set.touches(SNAPSHOT_EVIDENCE):
            self.snapshots.capture(self.store, self.ledger, self.ledger_secret, entry)

        touches_nodes = write_set.touches(NODES_INFO)
        before = trusted_nodes(self.store) if touches_nodes else None
        retiring = (
            {n for n, info in read_nodes(self.store).items() if info.status is NodeStatus.RETIRING}
            if touches_nodes
            else set()
        )
        self.store.apply(entry.txid, write_set)

        if touches_nodes:
            for node_id in retiring:
                info = read_node(self.store, node_id)
                if info is not None and info.status is NodeStatus.RETIRED:
                    self.retirements[node_id] = entry.txid.seqno
            mine = read_node(self.store, self.node_id)
            if mine is not None and mine.status is NodeStatus.RETIRED and self._retired_at is None:
                self._retired_at = entry.txid.seqno
        if entry.kind is EntryKind.RECONFIGURATION:
            return trusted_nodes(self.store)
        if touches_nodes and trusted_nodes(self.store) != before:
            return trusted_nodes(self.store)
        return None

    def on_rollback(self, seqno: int) -> None:
        self.store.rollback_to(seqno)
        self.snapshots.rollback(seqno)
        if self._retired_at is not None and self._retired_at > seqno:
            self._retired_at = None
        self.retirements = {n: s for n, s in self.retirements.items() if s <= seqno}

    def on_commit(self, seqno: int) -> None:
        self.store.compact(seqno)
        self.snapshots.finalize(seqno, lambda e: self.receipt_for(self.ledger.txid_at(e)))
        if self._retired_at is not None and self._retired_at <= seqno and not self.retired:
            self.retired = True
            logger.info(f"{self.node_id} retired at {seqno}")
            self._event("retired", seqno=seqno)
        self._housekeeping_due = True

    def make_signature(self, txid: TransactionId) -> LedgerEntry:
        history = self.ledger.view_history
        if not history or history[-1][0] < txid.view:
            history.append((txid.view, txid.seqno))
        entry, _ = make_signature_entry(
            txid, self.ledger.tree, self.identity, self.node_id, history
        )
        self.last_signature_time = self.now
        return entry

    def _restore(self, data: bytes) -> Optional[FrozenSet[str]]:
        try:
            restored = restore_snapshot(data, self.ledger_secret, self.service_identity)
        except SnapshotError as e:
            logger.warning(f"{self.node_id} rejected a snapshot: {e.message}")
            return None
        self.ledger = Ledger(restored.txid, restored.leaves, restored.view_history)
        self.store = restored.store
        self.snapshots.adopt(restored.as_snapshot())
        logger.info(f"{self.node_id} restored a snapshot at {restored.txid}")
        return trusted_nodes(self.store)

    def install_snapshot(self, data: bytes) -> Optional[FrozenSet[str]]:
        return self._restore(data)

    def latest_snapshot(self) -> Optional[Tuple[int, bytes]]:
        return self.snapshots.latest_bytes()

    def learners(self) -> FrozenSet[str]:
        """
        Pending and retiring nodes, plus retired nodes that have not yet
        reported a commit point covering their own retirement.
        """
        learners = set()
        for node_id, info in read_nodes(self.store).items():
            if node_id == self.node_id:
                continue
            if info.status in (NodeStatus.PENDING, NodeStatus.RETIRING):
                learners.add(node_id)
            elif info.status is NodeStatus.RETIRED and node_id in self.retirements:
                if self.consensus.peer_commit.get(node_id, 0) < self.retirements[node_id]:
                    learners.add(node_id)
        return frozenset(learners)

    def may_vote(self) -> bool:
        return self.node_status() in (NodeStatus.TRUSTED, NodeStatus.RETIRING)

    def on_role_change(self, role: Role) -> None:
        if role is Role.PRIMARY:
            self.last_signature_time = self.now

    # -- driving ---------------------------------------------------------------

    def _event(self, event_type: str, **fields) -> None:
        self.events.append({"type": event_type, "node": self.node_id, "time": self.now, **fields})

    def tick(self, now: float) -> None:
        self.now = now
        if self.retired:
            return
        if self.joining:
            self._maybe_request_join()
            return
        self.consensus.tick(now)
        if self.is_primary and self._unsigned() > 0:
            interval = self.config.ledger.signature_interval_ms
            if interval is not None and now - self.last_signature_time >= interval:
                self.emit_signature()
        self._after_step()

    def receive(self, sender: str, message: Message, now: float) -> None:
        self.now = now
        if self.retired:
            if isinstance(message, AppendEntries):
                self.consensus.acknowledge_commit(sender)
            return
        if isinstance(message, JoinRequest):
            self._on_join_request(message)
        elif isinstance(message, JoinResponse):
            self._on_join_response(message)
        elif isinstance(message, ForwardedRequest):
            self._on_forwarded_request(message)
        elif isinstance(message, ForwardedResponse):
            self.client_outbox.append(
                ClientReply(message.session_id, message.request_id, message.response)
            )
        elif not self.joining:
            self.consensus.receive(message, now)
        self._after_step()

    def drain(self) -> Tuple[List[Tuple[str, Message]], List[ClientReply], List[dict]]:
        """Take everything produced since the last call."""
        messages = self.consensus.outbox + self.outbox
        events = self.consensus.events + self.events
        events.sort(key=lambda e: e["time"])
        replies = self.client_outbox
        self.consensus.outbox, self.outbox = [], []
        self.consensus.events, self.events = [], []
        self.client_outbox = []
        return messages, replies, events

    def _after_step(self) -> None:
        if self._housekeeping_due:
            self._housekeeping_due = False
            self._write_retirements()

    def _unsigned(self) -> int:
        return self.ledger.last_seqno - self.ledger.last_signature_txid.seqno

    # -- primary-side appends ------------------------------------------------------

    def emit_signature(self) -> TransactionId:
        entry = self.make_signature(self.consensus.next_txid())
        return self.consensus.append_local(entry)

    def _append_write_set(
        self, write_set: WriteSet, kind: EntryKind, claims=None
    ) -> TransactionId:
        txid = self.consensus.next_txid()
        entry = build_entry(txid, kind, write_set, self.ledger_secret, claims)
        self.consensus.append_local(entry, write_set)
        self._after_append()
        return txid

    def _after_append(self) -> None:
        if not self.is_primary:
            return
        if self._unsigned() >= self.config.ledger.signature_interval:
            self.emit_signature()
        interval = self.config.ledger.snapshot_interval
        last = self.ledger.last_seqno
        if interval and last - self.snapshots.last_evidence_seqno >= interval:
            self._write_snapshot_evidence()

    def _write_snapshot_evidence(self) -> None:
        snapshot = self.snapshots.prepare(self.store, self.ledger, self.ledger_secret)
        if snapshot is None:
            return
        write_set = WriteSet()
        write_set.put(SNAPSHOT_EVIDENCE, EVIDENCE_KEY, canonical_json({"seqno": snapshot.seqno}))
        txid = self.consensus.next_txid()
        entry = build_entry(txid, EntryKind.INTERNAL, write_set, None, snapshot.digest)
        self.consensus.append_local(entry, write_set)
        logger.debug(f"{self.node_id} recorded snapshot evidence at {txid}")

    def _write_retirements(self) -> None:
        """Mark RETIRING nodes RETIRED once no reconfiguration is in flight."""
        if not self.is_primary:
            return
        configs = self.consensus.configurations
        if not configs.is_stable or any(c.seqno > self.ledger.commit_seqno for c in configs):
            return
        retiring = {
            node_id: info
            for node_id, info in read_nodes(self.store).items()
            if info.status is NodeStatus.RETIRING
        }
        if not retiring:
            return
        tx = Tx(self.store, privileged=True)
        for node_id, info in sorted(retiring.items()):
            write_node(tx, node_id, info.with_status(NodeStatus.RETIRED))
        logger.info(f"{self.node_id} marks {sorted(retiring)} retired")
        self._append_write_set(tx.write_set, EntryKind.RECONFIGURATION)

    # -- joining ------------------------------------------------------------------

    def _maybe_request_join(self) -> None:
        if self.now < self._next_join_at or not self.join_targets:
            return
        target = self.join_targets[self._join_attempt % len(self.join_targets)]
        self._join_attempt += 1
        self._next_join_at = self.now + self.config.consensus.join_retry_ms
        self.outbox.append(
            (target, JoinRequest(self.node_id, 0, self.identity.public_id, self.code_id))
        )

    def _refuse_join(self, to: str, reason: str) -> None:
        hint = self.consensus.primary_id if not self.is_primary else None
        self.outbox.append(
            (to, JoinResponse(self.node_id, self.consensus.view, False, reason, hint))
        )

    def _on_join_request(self, message: JoinRequest) -> None:
        if not self.is_primary:
            self._refuse_join(message.sender, "not primary")
            return
        if self.service_status() not in (ServiceStatus.OPENING, ServiceStatus.OPEN):
            self._refuse_join(message.sender, "service is recovering")
            return
        if not code_id_allowed(self.store, message.code_id):
            self._refuse_join(message.sender, f"code id {message.code_id} is not allowed")
            return
        existing = read_node(self.store, message.sender)
        if existing is not None and existing.public_id != message.public_id:
            self._refuse_join(message.sender, "node id already in use")
            return
        if existing is None:
            tx = Tx(self.store, privileged=True)
            record = NodeInfo(
                NodeStatus.PENDING,
                message.public_id,
                message.code_id,
                sign(self.service_key, endorsement_message(message.public_id)),
            )
            write_node(tx, message.sender, record)
            self._append_write_set(tx.write_set, EntryKind.INTERNAL)
            logger.info(f"{self.node_id} admitted {message.sender} as pending")
        snapshot = self.latest_snapshot()
        self.outbox.append(
            (
                message.sender,
                JoinResponse(
                    self.node_id,
                    self.consensus.view,
                    True,
                    service_secret=self.service_key.secret,
                    ledger_secret=self.ledger_secret.key,
                    snapshot=snapshot[1] if snapshot else None,
                ),
            )
        )

    def _on_join_response(self, message: JoinResponse) -> None:
        if not self.joining:
            return
        if not message.accepted:
            logger.debug(f"{self.node_id} join refused by {message.sender}: {message.reason}")
            if message.primary_hint and message.primary_hint not in self.join_targets:
                self.join_targets.append(message.primary_hint)
            if message.primary_hint:
                self._join_attempt = self.join_targets.index(message.primary_hint)
                self._next_join_at = self.now
            return
        self.service_key = KeyPair.from_secret(message.service_secret)
        self.ledger_secret = SymmetricSecret(message.ledger_secret)
        if message.snapshot is not None:
            nodes = self._restore(message.snapshot)
            if nodes is not None:
                seqno = self.ledger.start.seqno
                self.consensus.configurations = ActiveConfigurations(
                    [Configuration(seqno, nodes)], committed_seqno=seqno
                )
        self.joining = False
        self.consensus.primary_id = message.sender
        self.consensus.election_deadline = self.now + self.config.consensus.election_timeout_ms[1]
        logger.info(f"{self.node_id} joined through {message.sender} from {self.ledger.start}")
        self._event("joined", primary=message.sender, start=self.ledger.start.seqno)

    # -- client requests -------------------------------------------------------------

    def client_request(
        self, session_id: str, request_id: int, request: Request, now: float
    ) -> None:
        """Serve, forward or refuse one client request; the reply lands in client_outbox."""
        self.now = now
        response = self._handle_client(session_id, request_id, request)
        if response is not None:
            self.client_outbox.append(ClientReply(session_id, request_id, response))
        self._after_step()

    def _handle_client(
        self, session_id: str, request_id: int, request: Request
    ) -> Optional[Response]:
        if self.retired or self.joining:
            return Response.failed(ResponseStatus.UNAVAILABLE, "node is not part of the service")
        if request.endpoint == TX_STATUS_ENDPOINT:
            return self._tx_status(request)
        if request.endpoint == RECEIPT_ENDPOINT:
            return self._receipt(request)

        sticky = self.sessions.get(session_id)
        if sticky is not None:
            if sticky != self.consensus.primary_id or self.is_primary:
                del self.sessions[session_id]
                return Response.failed(
                    ResponseStatus.SESSION_TERMINATED, f"primary {sticky} is gone"
                )
            return self._forward(session_id, request_id, request, sticky)

        if request.endpoint != GOVERNANCE_ENDPOINT and self.app.is_read_only(request.endpoint):
            return self._execute(request)
        if self.is_primary:
            return self._execute(request)
        primary = self.consensus.primary_id
        if primary is None:
            return Response.failed(ResponseStatus.UNAVAILABLE, "no primary is known")
        self.sessions[session_id] = primary
        return self._forward(session_id, request_id, request, primary)

    def _forward(
        self, session_id: str, request_id: int, request: Request, primary: str
    ) -> None:
        self.outbox.append(
            (primary, ForwardedRequest(self.node_id, self.consensus.view, session_id, request_id, request))
        )
        return None

    def _on_forwarded_request(self, message: ForwardedRequest) -> None:
        if self.is_primary:
            response = self._execute(message.request)
        else:
            response = Response.failed(ResponseStatus.NOT_PRIMARY, f"{self.node_id} is not primary")
        self.outbox.append(
            (
                message.sender,
                ForwardedResponse(
                    self.node_id, self.consensus.view, message.session_id, message.request_id, response
                ),
            )
        )

    def _tx_status(self, request: Request) -> Response:
        try:
            txid = TransactionId.parse(str(request.args.get("txid")))
        except ConsortiumLedgerError as e:
            return Response.failed(ResponseStatus.ERROR, e.message)
        return Response(ResponseStatus.OK, body=evaluate_status(self.ledger, txid).value)

    def _receipt(self, request: Request) -> Response:
        try:
            txid = TransactionId.parse(str(request.args.get("txid")))
        except ConsortiumLedgerError as e:
            return Response.failed(ResponseStatus.ERROR, e.message)
        receipt = self.receipt_for(txid)
        if receipt.is_failure():
            return Response.failed(ResponseStatus.ERROR, receipt.error().message)
        return Response(ResponseStatus.OK, body=receipt.unwrap().to_text(), txid=txid)

    def _execute(self, request: Request) -> Response:
        if request.endpoint == GOVERNANCE_ENDPOINT:
            return self._governance(request)
        if self.service_status() is not ServiceStatus.OPEN:
            return Response.failed(ResponseStatus.SERVICE_NOT_OPEN, "service is not open")
        result = execute_endpoint(self.store, self.app, request)
        if result.write_set is None:
            return result.response
        if not self.is_primary:
            return Response.failed(ResponseStatus.NOT_PRIMARY, f"{self.node_id} is not primary")
        txid = self._append_write_set(result.write_set, EntryKind.USER, result.claims_digest)
        return Response(ResponseStatus.OK, body=result.response.body, txid=txid)

    # -- governance and recovery ------------------------------------------------------

    def _governance(self, request: Request) -> Response:
        try:
            signed = SignedRequest.from_bytes(str(request.args.get("request", "")).encode("utf-8"))
        except ConsortiumLedgerError as e:
            return Response.failed(ResponseStatus.ERROR, e.message)
        if signed.kind is RequestKind.RECOVERY_SHARE:
            return self.submit_recovery_share(signed)
        if not self.is_primary:
            return Response.failed(ResponseStatus.NOT_PRIMARY, f"{self.node_id} is not primary")

        tx = Tx(self.store, privileged=True)
        ctx = ActionContext(self.rng, self.ledger_secret)
        outcome = self.governance.submit(tx, signed, ctx)
        if outcome.is_failure():
            error = outcome.error()
            return Response.failed(ResponseStatus.ERROR, str(error))
        if not tx.write_set:
            return Response(ResponseStatus.OK, body=outcome.unwrap())
        kind = _entry_kind(tx.write_set, EntryKind.GOVERNANCE)
        if kind is EntryKind.RECONFIGURATION and not self.consensus.configurations.is_stable:
            return Response.failed(
                ResponseStatus.ERROR,
                str(OperationError(ErrorType.RECONFIGURATION_PENDING, "a reconfiguration is in flight")),
            )
        txid = self._append_write_set(tx.write_set, kind)
        return Response(ResponseStatus.OK, body=outcome.unwrap(), txid=txid)

    def submit_recovery_share(self, signed: SignedRequest) -> Response:
        """Take one member's decrypted share; finishes recovery once enough are in."""
        if self.recovery is None or not self.is_primary:
            return Response.failed(ResponseStatus.ERROR, "this node is not recovering a service")
        if self.service_status() is not ServiceStatus.WAITING_FOR_RECOVERY_SHARES:
            return Response.failed(
                ResponseStatus.SERVICE_NOT_OPEN, "members have not yet approved the recovery"
            )
        verified = self.governance.verify(self.store, signed)
        if verified.is_failure():
            return Response.failed(ResponseStatus.ERROR, str(verified.error()))
        try:
            share = parse_share(signed.parsed_body())
        except ConsortiumLedgerError as e:
            return Response.failed(ResponseStatus.ERROR, e.message)

        outcome = self.recovery.submit(self.store, signed.member_id, share)
        if outcome.is_failure():
            return Response.failed(ResponseStatus.ERROR, str(outcome.error()))
        secret = outcome.unwrap()
        if secret is None:
            return Response(
                ResponseStatus.OK,
                body={"submitted": self.recovery.submitted, "recovered": False},
            )
        submitted = self.recovery.submitted
        txid = self.finish_recovery(secret)
        return Response(
            ResponseStatus.OK, body={"submitted": submitted, "recovered": True}, txid=txid
        )

    def finish_recovery(self, secret: SymmetricSecret) -> TransactionId:
        """
        Replay the whole ledger with the recovered secret, then open the
        service and re-issue shares of the same secret.

        Raises:
            LedgerIntegrityError: If any recovered entry fails to decrypt
        """
        self.ledger_secret = secret
        store = StoreState()
        for entry in self.ledger.entries(self.ledger.start.seqno + 1):
            opened = open_entry(entry, secret)
            if opened.is_failure():
                raise LedgerIntegrityError(str(opened.error()), seqno=entry.txid.seqno)
            store.apply(entry.txid, opened.unwrap())
        store.compact(self.ledger.commit_seqno)
        self.store = store

        tx = Tx(self.store, privileged=True)
        service = read_service(tx)
        write_service(tx, service.with_status(ServiceStatus.OPEN))
        threshold = recovery_threshold(tx)
        if threshold is not None and tx.get(LEDGER_SECRET, WRAPPED_SECRET_KEY) is not None:
            issue_shares(tx, secret, threshold, self.rng)
        logger.info(f"{self.node_id} recovered the private state; service is open")
        self.recovery = None
        txid = self._append_write_set(tx.write_set, EntryKind.INTERNAL)
        self._event("recovered", seqno=txid.seqno)
        return txid
