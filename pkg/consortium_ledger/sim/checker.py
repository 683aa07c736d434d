"""
Post-hoc safety checks over a simulation trace.

Each invariant is evaluated over the whole trace and reports the index of
the first event that breaks it. An "epoch" event (disaster recovery starts a
new service) resets all per-service state: recovery may legitimately lose
committed transactions of the previous service.
"""

import bisect
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from consortium_ledger.common.txid import TransactionId
from consortium_ledger.project_logging import get_logger
from consortium_ledger.sim.trace import Event, Trace

logger = get_logger("sim.checker")

INVARIANTS = (
    "election_safety",
    "vote_uniqueness",
    "decision_quorum",
    "commit_agreement",
    "log_matching",
    "commit_durability",
    "status_finality",
    "reconfiguration_safety",
)


@dataclass
class InvariantResult:
    name: str
    passed: bool = True
    event_index: Optional[int] = None
    message: Optional[str] = None


@dataclass
class CheckReport:
    results: List[InvariantResult] = field(default_factory=list)
    events: int = 0

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def first_violation(self) -> Optional[InvariantResult]:
        failed = [r for r in self.results if not r.passed]
        return min(failed, key=lambda r: r.event_index) if failed else None

    def to_dict(self) -> dict:
        return {"ok": self.ok, "events": self.events, "results": [asdict(r) for r in self.results]}


def _view_at(history: Sequence[Sequence[int]], seqno: int) -> Optional[int]:
    starts = [s for _, s in history]
    index = bisect.bisect_right(starts, seqno) - 1
    return history[index][0] if index >= 0 else None


def _is_majority(nodes: Sequence[str], acks: Sequence[str]) -> bool:
    nodes = set(nodes)
    return bool(nodes) and len(nodes & set(acks)) * 2 > len(nodes)


class _Checker:
    def __init__(self):
        self.results = {name: InvariantResult(name) for name in INVARIANTS}
        self.reset()

    def reset(self) -> None:
        self.primaries: Dict[int, str] = {}
        self.votes: Dict[Tuple[str, int], str] = {}
        self.roots: Dict[int, Tuple[int, str]] = {}
        self.reference: Optional[Event] = None
        self.finals: Dict[str, str] = {}
        # seqno -> (view at commit, nodes) of committed configurations
        self.committed_configs: Dict[int, Tuple[int, List[str]]] = {}

    def fail(self, name: str, index: int, message: str) -> None:
        result = self.results[name]
        if result.passed:
            result.passed = False
            result.event_index = index
            result.message = message
            logger.error(f"Invariant {name} violated at event {index}: {message}")

    def check(self, index: int, event: Event) -> None:
        handler = getattr(self, "_on_" + event["type"].replace("-", "_"), None)
        if handler is not None:
            handler(index, event)

    def _on_epoch(self, index: int, event: Event) -> None:
        self.reset()

    def _on_role(self, index: int, event: Event) -> None:
        if event["role"] != "primary":
            return
        view, node = event["view"], event["node"]
        holder = self.primaries.setdefault(view, node)
        if holder != node:
            self.fail("election_safety", index, f"{holder} and {node} both primary in view {view}")

    def _on_vote(self, index: int, event: Event) -> None:
        key = (event["node"], event["view"])
        chosen = self.votes.setdefault(key, event["candidate"])
        if chosen != event["candidate"]:
            self.fail(
                "vote_uniqueness",
                index,
                f"{event['node']} voted for {chosen} and {event['candidate']} in view {event['view']}",
            )

    def _on_decision(self, index: int, event: Event) -> None:
        acks = event["acks"]
        for seqno, nodes in event["configs"]:
            if not _is_majority(nodes, acks):
                self.fail(
                    "decision_quorum",
                    index,
                    f"{event['kind']} by {event['node']} lacks a majority of config {seqno}",
                )
        latest = None
        for seqno in sorted(self.committed_configs):
            view, nodes = self.committed_configs[seqno]
            if view <= event["view"]:
                latest = (seqno, nodes)
        if latest is not None and not _is_majority(latest[1], acks):
            self.fail(
                "reconfiguration_safety",
                index,
                f"{event['kind']} in view {event['view']} misses a majority of "
                f"committed config {latest[0]} {latest[1]}",
            )

    def _on_config_commit(self, index: int, event: Event) -> None:
        self.committed_configs.setdefault(event["seqno"], (event["view"], event["nodes"]))

    def _on_commit(self, index: int, event: Event) -> None:
        seqno, view, root = event["seqno"], event["view"], event["root"]
        known = self.roots.setdefault(seqno, (view, root))
        if known != (view, root):
            self.fail(
                "commit_agreement",
                index,
                f"{event['node']} committed {view}.{seqno} with a different root than {known[0]}.{seqno}",
            )
        history = event["view_history"]
        ref = self.reference
        if ref is not None:
            upto = min(seqno, ref["seqno"])
            points = {s for _, s in history if s <= upto} | {s for _, s in ref["view_history"] if s <= upto}
            points.add(upto)
            for point in sorted(points):
                if _view_at(history, point) != _view_at(ref["view_history"], point):
                    self.fail(
                        "log_matching",
                        index,
                        f"{event['node']} committed a prefix that differs at seqno {point}",
                    )
                    break
        if ref is None or seqno > ref["seqno"]:
            self.reference = event

    def _committed_view(self, seqno: int) -> Optional[int]:
        ref = self.reference
        if ref is None or seqno > ref["seqno"]:
            return None
        return _view_at(ref["view_history"], seqno)

    def _on_truncate(self, index: int, event: Event) -> None:
        for text in event["removed"]:
            txid = TransactionId.parse(text)
            if self._committed_view(txid.seqno) == txid.view:
                self.fail(
                    "commit_durability",
                    index,
                    f"{event['node']} rolled back committed transaction {txid}",
                )
                return

    def _on_status(self, index: int, event: Event) -> None:
        txid_text, status = event["txid"], event["status"]
        if status not in ("Committed", "Invalid"):
            return
        previous = self.finals.setdefault(txid_text, status)
        if previous != status:
            self.fail(
                "status_finality",
                index,
                f"{txid_text} reported {previous} and later {status}",
            )
            return
        txid = TransactionId.parse(txid_text)
        committed_view = self._committed_view(txid.seqno)
        if status == "Committed" and committed_view is not None and committed_view != txid.view:
            self.fail("status_finality", index, f"{txid_text} reported Committed but was replaced")


def check_trace(trace: Trace) -> CheckReport:
    """Evaluate every safety invariant over a complete trace."""
    checker = _Checker()
    for index, event in enumerate(trace):
        checker.check(index, event)
    report = CheckReport(list(checker.results.values()), len(trace))
    if report.ok:
        logger.info(f"All {len(INVARIANTS)} invariants hold over {len(trace)} events")
    return report
