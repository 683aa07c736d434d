"""
Deterministic discrete-event simulator.

All activity is a callback on one priority queue ordered by (simulated time,
schedule sequence number). Nodes are NodeCore instances driven through
tick/receive/client_request; everything they emit is routed through the
simulated network after the node's processing cost has elapsed. Randomness
comes from generators seeded with the scenario seed and a fixed purpose
label, so a scenario run twice yields the same trace and ledgers, byte for
byte.
"""

import heapq
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from consortium_ledger.common.exceptions import (
    ConsensusInvariantError,
    InvariantViolationError,
    RecoveryError,
    SimulationError,
)
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.governance.model import MemberIdentity
from consortium_ledger.kv.endpoints import LoggingApp, Request
from consortium_ledger.kv.records import read_service
from consortium_ledger.kv.store import StoreState
from consortium_ledger.ledger.chunks import parse_chunk, render_chunks
from consortium_ledger.merkle.receipt import Receipt
from consortium_ledger.node.node import ClientReply, NodeCore
from consortium_ledger.project_logging import get_logger, set_simulated_time
from consortium_ledger.recovery.recovery import highest_view, recoverable_entries, start_recovery
from consortium_ledger.sim.checker import CheckReport, check_trace
from consortium_ledger.sim.clients import Client
from consortium_ledger.sim.governance import (
    RequestChain,
    open_service_chain,
    recovery_chain,
    scripted_chain,
)
from consortium_ledger.sim.metrics import MetricsRecorder, RunMetrics, write_csv
from consortium_ledger.sim.network import Network
from consortium_ledger.sim.scenario import FaultSpec, Scenario, TamperSpec
from consortium_ledger.sim.trace import Trace

logger = get_logger("sim")

LedgerFiles = List[Tuple[str, bytes]]


def tamper(files: LedgerFiles, spec: TamperSpec) -> LedgerFiles:
    """Apply one byte flip or truncation to a node's rendered ledger files."""
    if not files:
        return files
    files = list(files)
    index = spec.file_index % len(files)
    name, data = files[index]
    offset = spec.offset % len(data)
    if spec.kind == "flip":
        data = data[:offset] + bytes([data[offset] ^ 0xFF]) + data[offset + 1 :]
    else:
        data = data[:offset]
    files[index] = (name, data)
    logger.info(f"Tampered with {name} of {spec.node}: {spec.kind} at {offset}")
    return files


@dataclass
class SimulationResult:
    scenario: Scenario
    trace: Trace
    metrics: RunMetrics
    intervals: List[Dict[str, float]]
    report: CheckReport
    nodes: Dict[str, NodeCore] = field(repr=False)
    ledger_files: Dict[str, LedgerFiles] = field(repr=False)

    @property
    def ok(self) -> bool:
        return self.report.ok

    def service_identities(self) -> Dict[str, str]:
        """Hex service identity each node's state was last endorsed under."""
        identities = {}
        for node_id, node in sorted(self.nodes.items()):
            service = read_service(node.store)
            if service is not None:
                identities[node_id] = service.identity.hex()
        return identities

    def committed_txids(self) -> List[str]:
        """Client writes observed as Committed, in trace order."""
        return [
            event["txid"]
            for event in self.trace.of_type("status")
            if event.get("status") == "Committed"
        ]

    def receipts(self, limit: Optional[int] = None) -> Dict[str, Receipt]:
        """Receipts for committed client writes from the first node able to serve each."""
        receipts: Dict[str, Receipt] = {}
        for txid in self.committed_txids()[:limit]:
            parsed = TransactionId.parse(txid)
            for _, node in sorted(self.nodes.items()):
                built = node.receipt_for(parsed)
                if built.is_success():
                    receipts[txid] = built.unwrap()
                    break
        return receipts

    def write_outputs(
        self, out_dir: Union[str, Path], receipts: int = 0
    ) -> Dict[str, Path]:
        """
        Write trace.jsonl, metrics.csv, summary.json and one ledger directory
        per node under out_dir. Each ledger directory also holds a
        `service_id` file; `receipts` > 0 writes that many receipts under
        receipts/.
        """
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "trace": self.trace.dump(out / "trace.jsonl"),
            "metrics": write_csv(self.intervals, out / "metrics.csv"),
        }
        summary = {
            "scenario": self.scenario.name,
            "seed": self.scenario.seed,
            "metrics": self.metrics.to_dict(),
            "invariants": self.report.to_dict(),
        }
        paths["summary"] = out / "summary.json"
        paths["summary"].write_text(json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8")
        identities = self.service_identities()
        for node_id, files in sorted(self.ledger_files.items()):
            directory = out / "ledgers" / node_id
            directory.mkdir(parents=True, exist_ok=True)
            for name, data in files:
                (directory / name).write_bytes(data)
            if node_id in identities:
                (directory / "service_id").write_text(identities[node_id] + "\n", encoding="utf-8")
        paths["ledgers"] = out / "ledgers"
        if receipts > 0:
            directory = out / "receipts"
            directory.mkdir(parents=True, exist_ok=True)
            for txid, receipt in self.receipts(receipts).items():
                (directory / f"{txid}.json").write_text(receipt.to_text(), encoding="utf-8")
            paths["receipts"] = directory
        return paths


class Simulator:
    """
    Args:
        scenario: What to run
        base_config: Configuration the scenario overrides are applied to
        record_messages: Also record every message delivery in the trace
    """

    def __init__(
        self,
        scenario: Scenario,
        base_config: Optional[AppConfig] = None,
        record_messages: bool = False,
    ):
        self.scenario = scenario
        self.config = scenario.app_config(base_config)
        self.record_messages = record_messages
        self.network = Network(self.config.simulation, self._rng("network"))
        self.members: Dict[str, MemberIdentity] = {
            m: MemberIdentity.generate(m, self._rng(m)) for m in scenario.member_ids
        }
        self.nodes: Dict[str, NodeCore] = {}
        self.busy_until: Dict[str, float] = {}
        self.labels: Dict[str, str] = {}
        self.committed_keys: Dict[bool, List[int]] = {False: [], True: []}
        self.trace = Trace()
        self.metrics = MetricsRecorder()
        self.clients: List[Client] = []
        self.chains: List[RequestChain] = []
        self.now = 0.0
        self._queue: List[Tuple[float, int, Callable[[], None]]] = []
        self._seq = 0
        self._owners: Dict[str, Any] = {}

    def _rng(self, purpose: str) -> random.Random:
        return random.Random(f"{self.scenario.seed}:{purpose}")

    # -- queue -------------------------------------------------------------------

    def schedule(self, at: float, callback: Callable[[], None]) -> None:
        self._seq += 1
        heapq.heappush(self._queue, (max(at, self.now), self._seq, callback))

    def register_session(self, session_id: str, owner: Any) -> None:
        self._owners[session_id] = owner

    # -- views ---------------------------------------------------------------------

    def reachable_nodes(self) -> List[str]:
        return sorted(
            node_id
            for node_id, node in self.nodes.items()
            if node_id not in self.network.crashed and not node.retired
        )

    def any_node(self) -> Optional[str]:
        nodes = self.reachable_nodes()
        return nodes[0] if nodes else None

    def primary_id(self) -> Optional[str]:
        primaries = [
            (self.nodes[n].consensus.view, n) for n in self.reachable_nodes() if self.nodes[n].is_primary
        ]
        return max(primaries)[1] if primaries else None

    def primary_store(self) -> Optional[StoreState]:
        primary = self.primary_id()
        return self.nodes[primary].store if primary else None

    # -- nodes -----------------------------------------------------------------------

    def _add_node(self, node: NodeCore) -> None:
        self.nodes[node.node_id] = node
        self.busy_until[node.node_id] = self.now
        self._flush(node.node_id, self.now)
        self.schedule(self.now, lambda: self._tick(node.node_id))

    def _join(self, node_id: str) -> None:
        if node_id in self.nodes:
            raise SimulationError(f"node id {node_id} was already used")
        peers = [n for n in self.reachable_nodes() if not self.nodes[n].joining]
        node = NodeCore.join_service(
            node_id, self.config, self._rng(node_id), peers, app=LoggingApp(), now=self.now
        )
        self._add_node(node)
        self.trace.record({"type": "fault", "kind": "join", "node": node_id, "time": self.now})

    def _tick(self, node_id: str) -> None:
        if node_id in self.network.crashed or self.nodes[node_id].retired:
            return
        self._run_on(node_id, lambda node: node.tick(self.now))
        self.schedule(self.now + self.config.simulation.tick_ms, lambda: self._tick(node_id))

    def _run_on(
        self, node_id: str, action: Callable[[NodeCore], None], extra_cost: float = 0.0
    ) -> None:
        """Run action on a node once it is idle, charging its processing cost."""
        if node_id in self.network.crashed or node_id not in self.nodes:
            return
        start = self.busy_until[node_id]
        if start > self.now:
            self.schedule(start, lambda: self._run_on(node_id, action, extra_cost))
            return
        node = self.nodes[node_id]
        before = node.ledger.last_seqno
        action(node)
        sim = self.config.simulation
        cost = extra_cost
        for entry in node.ledger.entries(before + 1):
            if entry.is_signature and node.is_primary:
                cost += sim.signature_cost_ms
            else:
                cost += sim.write_cost_ms
        self.metrics.work_ms += cost
        self.busy_until[node_id] = self.now + cost
        self._flush(node_id, self.now + cost)

    def _flush(self, node_id: str, at: float) -> None:
        messages, replies, events = self.nodes[node_id].drain()
        self.trace.extend(events)
        for event in events:
            if event["type"] == "decision" and event["kind"] == "commit":
                self.metrics.record_commit(event["time"], event["view"], event["seqno"])
        for to, message in messages:
            delay = self.network.send_delay(node_id, to)
            if delay is not None:
                self.schedule(at + delay, self._delivery(node_id, to, message))
        for reply in replies:
            self.schedule(at + self.network.client_delay(), self._reply(reply))

    def _delivery(self, sender: str, to: str, message) -> Callable[[], None]:
        def deliver() -> None:
            if not self.network.connected(sender, to) or to not in self.nodes:
                return
            if self.record_messages:
                self.trace.record(
                    {
                        "type": "deliver",
                        "from": sender,
                        "to": to,
                        "message": type(message).__name__,
                        "time": self.now,
                    }
                )
            self._run_on(to, lambda node: node.receive(sender, message, self.now))

        return deliver

    def _reply(self, reply: ClientReply) -> Callable[[], None]:
        def deliver() -> None:
            owner = self._owners.get(reply.session_id)
            if owner is not None:
                owner.on_reply(reply.request_id, reply.response)

        return deliver

    def send_request(self, node_id: str, session_id: str, request_id: int, request: Request) -> None:
        """Client to node; a crashed node never answers."""
        node = self.nodes.get(node_id)
        read_only = node is not None and node.app.is_read_only(request.endpoint)
        extra = self.config.simulation.read_cost_ms if read_only else 0.0

        def arrive() -> None:
            self._run_on(
                node_id,
                lambda n: n.client_request(session_id, request_id, request, self.now),
                extra,
            )

        self.schedule(self.now + self.network.client_delay(), arrive)

    # -- faults ------------------------------------------------------------------------

    def _resolve(self, name: Optional[str]) -> Optional[str]:
        if name == "primary":
            return self.primary_id()
        if name and name.startswith("@"):
            return self.labels.get(name[1:])
        return name

    def _crash(self, node_id: Optional[str], fault: FaultSpec) -> None:
        if node_id is None or node_id not in self.nodes:
            logger.warning(f"Fault {fault.kind} at {fault.at_ms} names no live node")
            return
        self.network.crashed.add(node_id)
        logger.info(f"{node_id} crashed at {self.now}")
        self.trace.record({"type": "fault", "kind": "crash", "node": node_id, "time": self.now})

    def _inject(self, fault: FaultSpec) -> None:
        node_id = self._resolve(fault.node)
        if fault.label and node_id:
            self.labels[fault.label] = node_id
        kind = fault.kind
        if kind == "crash":
            self._crash(node_id, fault)
        elif kind == "restart_as_new":
            self._crash(node_id, fault)
            self._join(fault.new_node)
            if fault.label:
                self.labels[fault.label + "_new"] = fault.new_node
        elif kind == "join":
            self._join(fault.new_node)
        elif kind == "resume_from_disk":
            try:
                NodeCore.resume_from_disk(node_id)
            except ConsensusInvariantError as e:
                logger.info(f"{node_id} may not resume from disk: {e.message}")
                self.trace.record(
                    {"type": "fault", "kind": "resume_refused", "node": node_id, "time": self.now}
                )
        elif kind == "partition":
            self.network.partition(fault.groups)
            self.trace.record(
                {"type": "fault", "kind": "partition", "groups": fault.groups, "time": self.now}
            )
        elif kind == "heal":
            self.network.heal()
            self.trace.record({"type": "fault", "kind": "heal", "time": self.now})
        elif kind == "network":
            self.network.reconfigure(fault.min_delay_ms, fault.max_delay_ms, fault.drop_rate)
            self.trace.record({"type": "fault", "kind": "network", "time": self.now})
        elif kind == "crash_all":
            for live in self.reachable_nodes():
                self._crash(live, fault)
        elif kind == "recover":
            self._recover(node_id, fault)

    def _recover(self, source: Optional[str], fault: FaultSpec) -> None:
        """Start a new service from the ledger files `source` left behind."""
        if source not in self.nodes:
            raise SimulationError(f"cannot recover from unknown node {source}")
        old = self.nodes[source]
        files = self._render(old)
        for spec in self.scenario.tamper:
            if spec.node == source:
                files = tamper(files, spec)
        try:
            chunks = [parse_chunk(Path(name), data) for name, data in files]
            entries = recoverable_entries(chunks, fault.committed_only)
        except RecoveryError as e:
            logger.error(f"Recovery from {source} failed: {e.message}")
            self.trace.record(
                {"type": "fault", "kind": "recover_failed", "node": source, "time": self.now}
            )
            return

        self.trace.record({"type": "epoch", "time": self.now, "source": source})
        new_id = fault.new_node
        node = start_recovery(
            entries,
            new_id,
            self.config,
            self._rng(new_id),
            committed_only=fault.committed_only,
            seen_view=highest_view(chunks),
            app=LoggingApp(),
            now=self.now,
        )
        self.trace.record(
            {"type": "fault", "kind": "recover", "node": new_id, "source": source, "time": self.now}
        )
        self._add_node(node)
        previous = node.recovery.previous_identity
        holders = fault.members or sorted(self.members)
        chain = recovery_chain(
            self, f"recover-{new_id}", self.now, new_id, previous, node.service_identity, holders
        )
        self.chains.append(chain)
        chain.start()

    def _render(self, node: NodeCore) -> LedgerFiles:
        return render_chunks(
            node.ledger.entries(node.ledger.start.seqno + 1),
            node.ledger.commit_seqno,
            self.scenario.chunk_threshold,
        )

    # -- run -----------------------------------------------------------------------------

    def _setup(self) -> None:
        scenario = self.scenario
        node_ids = scenario.node_ids
        first = NodeCore.create_service(
            node_ids[0],
            self.config,
            self._rng(node_ids[0]),
            members=[self.members[m].public_record() for m in scenario.member_ids],
            constitution=scenario.constitution,
            share_threshold=scenario.recovery_threshold,
            app=LoggingApp(),
        )
        self._add_node(first)
        for node_id in node_ids[1:]:
            node = NodeCore.join_service(
                node_id, self.config, self._rng(node_id), [node_ids[0]], app=LoggingApp()
            )
            self._add_node(node)

        if scenario.auto_open:
            self.chains.append(open_service_chain(self, node_ids))
        for step in scenario.governance:
            self.chains.append(scripted_chain(self, step))
        for chain in self.chains:
            chain.start()

        for index, spec in enumerate(scenario.clients):
            client = Client(spec, index, self._rng(f"client:{spec.name}"), self)
            self.clients.append(client)
            client.start()

        for fault in scenario.faults:
            self.schedule(fault.at_ms, lambda fault=fault: self._inject(fault))

    def run(self) -> SimulationResult:
        """Run the scenario to its end and check the trace."""
        logger.info(
            f"Running {self.scenario.name} seed {self.scenario.seed} "
            f"for {self.scenario.duration_ms} ms"
        )
        self._setup()
        end = self.scenario.duration_ms
        try:
            while self._queue and self._queue[0][0] <= end:
                at, _, callback = heapq.heappop(self._queue)
                self.now = at
                set_simulated_time(at)
                callback()
        finally:
            set_simulated_time(None)
        self.now = end

        files = {}
        for node_id, node in sorted(self.nodes.items()):
            rendered = self._render(node)
            for spec in self.scenario.tamper:
                if spec.node == node_id:
                    rendered = tamper(rendered, spec)
            files[node_id] = rendered

        report = check_trace(self.trace)
        return SimulationResult(
            scenario=self.scenario,
            trace=self.trace,
            metrics=self.metrics.summary(end),
            intervals=self.metrics.intervals(end),
            report=report,
            nodes=self.nodes,
            ledger_files=files,
        )


def run_scenario(
    scenario: Scenario,
    base_config: Optional[AppConfig] = None,
    out_dir: Optional[Union[str, Path]] = None,
    record_messages: bool = False,
    strict: bool = True,
    receipts: int = 0,
) -> SimulationResult:
    """
    Run a scenario, optionally writing its outputs.

    Raises:
        InvariantViolationError: If strict and the trace breaks an invariant;
            the outputs are written first
    """
    result = Simulator(scenario, base_config, record_messages).run()
    if out_dir is not None:
        result.write_outputs(out_dir, receipts=receipts)
    violation = result.report.first_violation
    if strict and violation is not None:
        raise InvariantViolationError(
            f"{violation.name} violated: {violation.message}", event_index=violation.event_index
        )
    return result

