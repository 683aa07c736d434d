"""
A bare consensus cluster for tests: ledgers only, messages delivered by hand.
"""

import random
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from consortium_ledger.common.txid import TransactionId
from consortium_ledger.config.config_models import ConsensusConfig
from consortium_ledger.consensus import (
    ActiveConfigurations,
    Configuration,
    ConsensusCore,
    StateMachine,
)
from consortium_ledger.crypto import KeyPair
from consortium_ledger.kv import WriteSet
from consortium_ledger.ledger import (
    EntryKind,
    Ledger,
    LedgerEntry,
    build_entry,
    make_signature_entry,
)


def signature_at(ledger: Ledger, key: KeyPair, node_id: str, txid: TransactionId) -> LedgerEntry:
    history = ledger.view_history
    if not history or history[-1][0] < txid.view:
        history.append((txid.view, txid.seqno))
    entry, _ = make_signature_entry(txid, ledger.tree, key, node_id, history)
    return entry


def build_entries(pattern: Sequence[Tuple[int, str]]) -> List[LedgerEntry]:
    """Entries for (view, "S" or "U") pairs, seqnos counting from 1."""
    ledger = Ledger()
    key = KeyPair.generate(random.Random("cluster"))
    for seqno, (view, kind) in enumerate(pattern, start=1):
        txid = TransactionId(view, seqno)
        if kind == "S":
            entry = signature_at(ledger, key, "n0", txid)
        else:
            ws = WriteSet()
            ws.put("public:app.msgs", str(seqno).encode(), b"message")
            entry = build_entry(txid, EntryKind.USER, ws, None)
        ledger.append(entry)
    return ledger.entries(1)


class LedgerMachine(StateMachine):
    def __init__(
        self,
        node_id: str,
        entries: Sequence[LedgerEntry],
        commit: int = 0,
        learner_ids: FrozenSet[str] = frozenset(),
    ):
        self.node_id = node_id
        self.learner_ids = learner_ids
        self.key = KeyPair.generate(random.Random(node_id))
        self.ledger = Ledger()
        for entry in entries:
            self.ledger.append(entry)
        if commit:
            self.ledger.mark_committed(commit)
        self.rollbacks: List[int] = []
        self.commits: List[int] = []

    def on_append(self, entry, write_set=None):
        return None

    def on_rollback(self, seqno: int) -> None:
        self.rollbacks.append(seqno)

    def on_commit(self, seqno: int) -> None:
        self.commits.append(seqno)

    def make_signature(self, txid: TransactionId) -> LedgerEntry:
        return signature_at(self.ledger, self.key, self.node_id, txid)

    def install_snapshot(self, data: bytes):
        return None

    def learners(self) -> FrozenSet[str]:
        return self.learner_ids

    def may_vote(self) -> bool:
        return self.node_id not in self.learner_ids


class Cluster:
    def __init__(
        self,
        ledgers: Dict[str, Sequence[LedgerEntry]],
        commits: Optional[Dict[str, int]] = None,
        view: int = 0,
        configurations: Optional[Iterable[Tuple[int, Iterable[str]]]] = None,
        learners: Iterable[str] = (),
    ):
        """
        Args:
            configurations: (seqno, nodes) pairs active on every node; by
                default one configuration of every node except the learners
            learners: Nodes that are replicated to but never vote
        """
        commits = commits or {}
        learner_ids = frozenset(learners)
        if configurations is None:
            configurations = [(0, frozenset(ledgers) - learner_ids)]
        configurations = [(seqno, frozenset(nodes)) for seqno, nodes in configurations]
        self.machines = {
            node_id: LedgerMachine(node_id, entries, commits.get(node_id, 0), learner_ids)
            for node_id, entries in ledgers.items()
        }
        self.cores = {
            node_id: ConsensusCore(
                node_id,
                machine,
                ConsensusConfig(),
                random.Random(node_id),
                configurations=ActiveConfigurations(
                    [Configuration(seqno, nodes) for seqno, nodes in configurations]
                ),
                view=view,
            )
            for node_id, machine in self.machines.items()
        }
        self.now = 0.0

    def deliver_all(self, limit: int = 10_000) -> int:
        """Deliver messages until none are left; returns how many were delivered."""
        delivered = 0
        while delivered < limit:
            batch = []
            for core in self.cores.values():
                batch.extend(core.outbox)
                core.outbox = []
            if not batch:
                return delivered
            for to, message in batch:
                self.cores[to].receive(message, self.now)
                delivered += 1
        raise AssertionError("cluster never went quiet")

    def elect(self, node_id: str) -> bool:
        self.cores[node_id].on_election_timeout()
        self.deliver_all()
        return self.cores[node_id].is_primary
