"""
Primary-based replication with signature-anchored commit.

The core is a single-threaded state machine. The node feeds it messages and
clock ticks (simulated time only) and drains `outbox` (messages to send) and
`events` (trace records) afterwards. It never reads a wall clock.

Differences from textbook Raft:
- Only signature entries commit, and the commit point is always one.
- Votes compare the candidate's last signature txid, not its last entry.
- Every commit and election needs a majority of each active configuration.
- A new primary first rolls back to its last signature and then opens its
  view with a fresh signature entry.
"""

import logging
import random
from abc import ABC, abstractmethod
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from consortium_ledger.common.exceptions import (
    ConsensusInvariantError,
    LedgerIntegrityError,
)
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.config.config_models import ConsensusConfig
from consortium_ledger.consensus.configurations import (
    ActiveConfigurations,
    Configuration,
)
from consortium_ledger.consensus.messages import (
    AppendEntries,
    AppendEntriesResponse,
    InstallSnapshot,
    Message,
    RequestVote,
    RequestVoteResponse,
)
from consortium_ledger.kv.write_set import WriteSet
from consortium_ledger.ledger.entry import LedgerEntry
from consortium_ledger.ledger.ledger import Ledger

logger = logging.getLogger("consortium_ledger.consensus")


class Role(str, Enum):
    PRIMARY = "primary"
    BACKUP = "backup"
    CANDIDATE = "candidate"


class StateMachine(ABC):
    """The replicated state a consensus core drives."""

    ledger: Ledger

    @abstractmethod
    def on_append(
        self, entry: LedgerEntry, write_set: Optional[WriteSet] = None
    ) -> Optional[FrozenSet[str]]:
        """
        Apply an entry just appended to the ledger.

        Returns:
            The new configuration if the entry is a reconfiguration
        """

    @abstractmethod
    def on_rollback(self, seqno: int) -> None:
        """The ledger was truncated to seqno."""

    @abstractmethod
    def on_commit(self, seqno: int) -> None:
        """Everything up to seqno is committed."""

    @abstractmethod
    def make_signature(self, txid: TransactionId) -> LedgerEntry:
        """Build the signature entry for position txid."""

    @abstractmethod
    def install_snapshot(self, data: bytes) -> Optional[FrozenSet[str]]:
        """
        Replace ledger and store with a snapshot.

        Returns:
            The configuration at the snapshot, or None if it was rejected
        """

    def latest_snapshot(self) -> Optional[Tuple[int, bytes]]:
        return None

    def learners(self) -> FrozenSet[str]:
        """Nodes that receive replication without voting."""
        return frozenset()

    def may_vote(self) -> bool:
        return True

    def on_role_change(self, role: Role) -> None:
        pass


class ConsensusCore:
    """
    Args:
        node_id: This node's id
        machine: Ledger and store owner
        config: Timing parameters
        rng: Source of randomized election timeouts
        configurations: Active configurations at start
        view: Initial view
        now: Simulated time at creation
    """

    def __init__(
        self,
        node_id: str,
        machine: StateMachine,
        config: ConsensusConfig,
        rng: random.Random,
        configurations: Optional[ActiveConfigurations] = None,
        view: int = 0,
        now: float = 0.0,
    ):
        self.node_id = node_id
        self.machine = machine
        self.config = config
        self.rng = rng
        self.configurations = configurations or ActiveConfigurations()
        self.view = view
        self.role = Role.BACKUP
        self.primary_id: Optional[str] = None
        self.voted_for: Dict[int, str] = {}
        self.votes: Set[str] = set()
        self.next_seqno: Dict[str, int] = {}
        self.match_seqno: Dict[str, int] = {}
        self.last_ack: Dict[str, float] = {}
        # highest commit seqno each peer has reported
        self.peer_commit: Dict[str, int] = {}
        self.now = now
        self.election_deadline = now + self._draw_timeout()
        self.next_heartbeat = now
        self.outbox: List[Tuple[str, Message]] = []
        self.events: List[dict] = []

    # -- state -------------------------------------------------------------

    @property
    def ledger(self) -> Ledger:
        return self.machine.ledger

    @property
    def commit_seqno(self) -> int:
        return self.ledger.commit_seqno

    @property
    def last_signature_txid(self) -> TransactionId:
        return self.ledger.last_signature_txid

    @property
    def is_primary(self) -> bool:
        return self.role is Role.PRIMARY

    def peers(self) -> List[str]:
        nodes = self.configurations.all_nodes | self.machine.learners()
        return sorted(nodes - {self.node_id})

    def is_eligible(self) -> bool:
        """True if this node may start an election."""
        config = self.configurations.first_containing(self.node_id)
        if config is None or not self.machine.may_vote():
            return False
        return self.last_signature_txid.seqno >= config.seqno

    def _draw_timeout(self) -> float:
        low, high = self.config.election_timeout_ms
        return self.rng.uniform(low, high)

    def _reset_election_timer(self) -> None:
        self.election_deadline = self.now + self._draw_timeout()

    def _event(self, event_type: str, **fields) -> None:
        self.events.append({"type": event_type, "node": self.node_id, "time": self.now, **fields})

    def _send(self, to: str, message: Message) -> None:
        self.outbox.append((to, message))

    # -- roles -------------------------------------------------------------

    def _set_role(self, role: Role, force: bool = False) -> None:
        if role is self.role and not force:
            return
        self.role = role
        logger.info(f"{self.node_id} is now {role.value} in view {self.view}")
        self._event("role", view=self.view, role=role.value)
        self.machine.on_role_change(role)

    def _adopt_view(self, view: int, primary_id: Optional[str]) -> None:
        if view > self.view:
            self.view = view
            self.votes = set()
        self.primary_id = primary_id
        self._set_role(Role.BACKUP)

    def bootstrap_primary(self, view: int) -> None:
        """Take the primary role directly, for genesis and recovery."""
        self.view = view
        self.voted_for[view] = self.node_id
        self.primary_id = self.node_id
        self._init_replication()
        self._set_role(Role.PRIMARY)

    def _init_replication(self) -> None:
        self.next_seqno = {}
        self.match_seqno = {}
        self.last_ack = {}
        for peer in self.peers():
            self._peer(peer)
        self.next_heartbeat = self.now

    def _peer(self, peer: str) -> None:
        if peer not in self.next_seqno:
            self.next_seqno[peer] = self.ledger.last_seqno + 1
            self.match_seqno[peer] = 0
            self.last_ack[peer] = self.now

    def step_down(self, reason: str) -> None:
        if self.role is Role.BACKUP:
            return
        logger.info(f"{self.node_id} steps down in view {self.view}: {reason}")
        self.primary_id = None
        self._set_role(Role.BACKUP)
        self._reset_election_timer()

    # -- ledger mutation -----------------------------------------------------

    def _append(self, entry: LedgerEntry, write_set: Optional[WriteSet] = None) -> None:
        self.ledger.append(entry)
        config = self.machine.on_append(entry, write_set)
        if config is not None:
            self.configurations.add(entry.txid.seqno, config)
            self._event(
                "config",
                seqno=entry.txid.seqno,
                view=entry.txid.view,
                nodes=sorted(config),
            )
            if self.is_primary:
                for peer in self.peers():
                    self._peer(peer)

    def _truncate(self, seqno: int) -> None:
        if seqno < self.commit_seqno:
            raise ConsensusInvariantError(
                f"truncation to {seqno} below commit {self.commit_seqno}",
                node_id=self.node_id,
            )
        try:
            removed = self.ledger.truncate(seqno)
        except LedgerIntegrityError as e:
            raise ConsensusInvariantError(e.message, node_id=self.node_id)
        if removed:
            self.machine.on_rollback(seqno)
            self.configurations.rollback(seqno)
            self._event("truncate", seqno=seqno, removed=[str(t) for t in removed])

    def _commit(self, seqno: int) -> None:
        if seqno <= self.commit_seqno:
            return
        ledger = self.ledger
        ledger.mark_committed(seqno)
        newly = self.configurations.commit(seqno)
        self.machine.on_commit(seqno)
        committed_txid = ledger.txid_at(seqno)
        self._event(
            "commit",
            seqno=seqno,
            view=committed_txid.view,
            root=ledger.root_at(seqno).hex(),
            view_history=[list(v) for v in ledger.view_history if v[1] <= seqno],
        )
        for config in newly:
            self._event(
                "config-commit",
                seqno=config.seqno,
                view=committed_txid.view,
                nodes=sorted(config.nodes),
            )
        if self.is_primary and not self.configurations.contains(self.node_id):
            self.step_down("retirement committed")

    def append_local(
        self, entry: LedgerEntry, write_set: Optional[WriteSet] = None
    ) -> TransactionId:
        """
        Append an entry produced by this primary.

        Raises:
            ConsensusInvariantError: If this node is not primary or the entry is
                not at the next position of the current view
        """
        expected = TransactionId(self.view, self.ledger.last_seqno + 1)
        if not self.is_primary or entry.txid != expected:
            raise ConsensusInvariantError(
                f"cannot append {entry.txid} locally (expected {expected}, role {self.role.value})",
                node_id=self.node_id,
            )
        self._append(entry, write_set)
        if entry.is_signature:
            self.flush()
            self.advance_commit()
        return entry.txid

    def next_txid(self) -> TransactionId:
        return TransactionId(self.view, self.ledger.last_seqno + 1)

    # -- timers --------------------------------------------------------------

    def tick(self, now: float) -> None:
        self.now = now
        if self.is_primary:
            self._check_liveness()
            if not self.is_primary:
                return
            if now >= self.next_heartbeat:
                self.flush(heartbeat=True)
                self.next_heartbeat = now + self.config.heartbeat_ms
            else:
                self.flush()
        elif now >= self.election_deadline:
            self.on_election_timeout()

    def _check_liveness(self) -> None:
        if not (self.configurations.all_nodes - {self.node_id}):
            return
        window = self.config.effective_liveness_window_ms
        acks = {self.node_id} | {
            peer for peer, at in self.last_ack.items() if self.now - at <= window
        }
        if not self.configurations.has_quorum(acks):
            self.step_down("lost contact with a quorum")

    # -- replication (primary) -------------------------------------------------

    def flush(self, heartbeat: bool = False) -> None:
        if not self.is_primary:
            return
        for peer in self.peers():
            self._peer(peer)
            if heartbeat or self.next_seqno[peer] <= self.ledger.last_seqno:
                self._send_append(peer)

    def _send_append(self, peer: str) -> None:
        ledger = self.ledger
        next_seqno = self.next_seqno[peer]
        if next_seqno - 1 < ledger.start.seqno:
            snapshot = self.machine.latest_snapshot()
            if snapshot is None:
                logger.warning(f"{self.node_id} cannot serve {peer} below {ledger.start}")
                return
            seqno, data = snapshot
            self._send(peer, InstallSnapshot(self.node_id, self.view, data, seqno))
            self.next_seqno[peer] = seqno + 1
            return
        entries = ledger.entries(next_seqno, next_seqno + self.config.max_batch - 1)
        prev = ledger.txid_at(next_seqno - 1)
        self._send(
            peer,
            AppendEntries(self.node_id, self.view, prev, tuple(entries), self.commit_seqno),
        )
        self.next_seqno[peer] = next_seqno + len(entries)

    def advance_commit(self) -> None:
        """Commit the newest current-view signature held by a quorum of every configuration."""
        if not self.is_primary:
            return
        for seqno in reversed(self.ledger.signature_seqnos):
            if seqno <= self.commit_seqno:
                return
            if self.ledger.txid_at(seqno).view != self.view:
                continue
            # learners replicate but are never counted
            acks = self.configurations.all_nodes & (
                {self.node_id}
                | {peer for peer, match in self.match_seqno.items() if match >= seqno}
            )
            if self.configurations.has_quorum(acks):
                self._event(
                    "decision",
                    kind="commit",
                    view=self.view,
                    seqno=seqno,
                    acks=sorted(acks),
                    configs=self.configurations.to_list(),
                )
                self._commit(seqno)
                return

    # -- elections -------------------------------------------------------------

    def on_election_timeout(self) -> None:
        self._reset_election_timer()
        if not self.is_eligible():
            return
        self.view += 1
        self.voted_for[self.view] = self.node_id
        self.votes = {self.node_id}
        self.primary_id = None
        self._set_role(Role.CANDIDATE, force=True)
        logger.debug(f"{self.node_id} starts an election for view {self.view}")
        request = RequestVote(self.node_id, self.view, self.last_signature_txid)
        for node in sorted(self.configurations.all_nodes - {self.node_id}):
            self._send(node, request)
        self._tally()

    def _tally(self) -> None:
        if self.role is Role.CANDIDATE and self.configurations.has_quorum(self.votes):
            self._become_primary()

    def _become_primary(self) -> None:
        self._event(
            "decision",
            kind="election",
            view=self.view,
            seqno=self.ledger.last_signature_txid.seqno,
            acks=sorted(self.votes),
            configs=self.configurations.to_list(),
        )
        self._truncate(self.ledger.last_signature_txid.seqno)
        self.primary_id = self.node_id
        self._init_replication()
        self._set_role(Role.PRIMARY)
        self._append(self.machine.make_signature(self.next_txid()))
        self.flush(heartbeat=True)
        self.next_heartbeat = self.now + self.config.heartbeat_ms
        self.advance_commit()

    # -- message handling ------------------------------------------------------

    def receive(self, message: Message, now: float) -> None:
        self.now = now
        handler = {
            AppendEntries: self._on_append_entries,
            AppendEntriesResponse: self._on_append_entries_response,
            RequestVote: self._on_request_vote,
            RequestVoteResponse: self._on_request_vote_response,
            InstallSnapshot: self._on_install_snapshot,
        }.get(type(message))
        if handler is None:
            raise ConsensusInvariantError(
                f"not a consensus message: {message.kind}", node_id=self.node_id
            )
        handler(message)

    def _accept_primary(self, message: Message) -> bool:
        """Apply view synchronization for a message from a primary."""
        if message.view < self.view:
            return False
        if message.view == self.view and self.is_primary:
            logger.error(f"{self.node_id}: second primary {message.sender} in view {self.view}")
            return False
        self._adopt_view(message.view, message.sender)
        self._reset_election_timer()
        return True

    def _respond_append(self, to: str, success: bool, last_seqno: Optional[int]) -> None:
        self._send(
            to,
            AppendEntriesResponse(self.node_id, self.view, success, last_seqno, self.commit_seqno),
        )

    def acknowledge_commit(self, to: str) -> None:
        """Report this node's commit point without taking part in replication."""
        self._respond_append(to, False, None)

    def _on_append_entries(self, message: AppendEntries) -> None:
        ledger = self.ledger
        if not self._accept_primary(message):
            self._respond_append(message.sender, False, None)
            return

        prev = message.prev_txid
        if prev.seqno < ledger.start.seqno:
            self._respond_append(message.sender, False, self.commit_seqno)
            return
        if prev.seqno > ledger.last_seqno:
            self._respond_append(message.sender, False, ledger.last_seqno)
            return
        if ledger.txid_at(prev.seqno) != prev:
            hint = max(
                ledger.last_signature_at_or_below(prev.seqno - 1),
                self.commit_seqno,
                ledger.start.seqno,
            )
            self._respond_append(message.sender, False, min(hint, prev.seqno - 1))
            return

        for entry in message.entries:
            seqno = entry.txid.seqno
            if ledger.has(seqno):
                if ledger.txid_at(seqno) == entry.txid:
                    continue
                self._truncate(seqno - 1)
            self._append(entry)

        upto = message.last_seqno
        commit = ledger.last_signature_at_or_below(min(message.commit_seqno, upto))
        if commit > self.commit_seqno:
            self._commit(commit)
        self._respond_append(message.sender, True, upto)

    def _on_append_entries_response(self, message: AppendEntriesResponse) -> None:
        peer = message.sender
        self.peer_commit[peer] = max(self.peer_commit.get(peer, 0), message.commit_seqno)
        if message.view > self.view:
            self._adopt_view(message.view, None)
            self._reset_election_timer()
            return
        if not self.is_primary or message.view < self.view or message.last_seqno is None:
            return
        self._peer(peer)
        self.last_ack[peer] = self.now
        if message.success:
            self.match_seqno[peer] = max(self.match_seqno[peer], message.last_seqno)
            self.next_seqno[peer] = max(self.next_seqno[peer], self.match_seqno[peer] + 1)
            self.advance_commit()
        else:
            hint = max(message.last_seqno, self.match_seqno[peer]) + 1
            self.next_seqno[peer] = min(hint, self.ledger.last_seqno + 1)
            self._send_append(peer)

    def _on_request_vote(self, message: RequestVote) -> None:
        if message.view > self.view:
            self._adopt_view(message.view, None)
        granted = (
            message.view == self.view
            and self.machine.may_vote()
            and self.voted_for.get(self.view) in (None, message.sender)
            and message.last_signature_txid >= self.last_signature_txid
        )
        if granted:
            self.voted_for[self.view] = message.sender
            self._reset_election_timer()
            self._event("vote", view=self.view, candidate=message.sender)
        self._send(message.sender, RequestVoteResponse(self.node_id, self.view, granted))

    def _on_request_vote_response(self, message: RequestVoteResponse) -> None:
        if message.view > self.view:
            self._adopt_view(message.view, None)
            self._reset_election_timer()
            return
        if self.role is not Role.CANDIDATE or message.view < self.view:
            return
        if message.granted:
            self.votes.add(message.sender)
            self._tally()

    def _on_install_snapshot(self, message: InstallSnapshot) -> None:
        if not self._accept_primary(message):
            self._respond_append(message.sender, False, None)
            return
        if message.snapshot_seqno > self.commit_seqno:
            nodes = self.machine.install_snapshot(message.snapshot)
            if nodes is None:
                self._respond_append(message.sender, False, self.commit_seqno)
                return
            seqno = message.snapshot_seqno
            self.configurations = ActiveConfigurations(
                [Configuration(seqno, nodes)], committed_seqno=seqno
            )
            self._event("snapshot-installed", seqno=seqno)
        self._respond_append(message.sender, True, self.commit_seqno)
