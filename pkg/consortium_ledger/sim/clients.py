"""
Simulated clients.

A client talks to one node through a session. Writes stick to whichever
primary the node forwarded the first one to; when that primary is gone the
node terminates the session and the client opens a new one. A node that
stops answering makes the client move on to another node. Reads are served
locally by the attached node unless the session is already sticky.
"""

import random
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, Optional, Union

from consortium_ledger.kv.endpoints import Request, Response, ResponseStatus
from consortium_ledger.node.node import TX_STATUS_ENDPOINT
from consortium_ledger.project_logging import get_logger
from consortium_ledger.sim.metrics import ReadRecord, WriteRecord
from consortium_ledger.sim.scenario import ClientSpec

if TYPE_CHECKING:
    from consortium_ledger.sim.simulator import Simulator

logger = get_logger("sim.clients")

FINAL_STATUSES = ("Committed", "Invalid")


@dataclass
class ClientSession:
    session_id: str
    node: str


@dataclass
class _Pending:
    kind: str
    record: Union[WriteRecord, ReadRecord]
    key: Optional[int] = None


class Client:
    """
    Args:
        spec: Workload description
        index: Position of the client in the scenario, used for message ids
        rng: Randomness for this client only
        sim: Transport and clock
    """

    def __init__(self, spec: ClientSpec, index: int, rng: random.Random, sim: "Simulator"):
        self.spec = spec
        self.rng = rng
        self.sim = sim
        self._sessions = 0
        self._next_request = 0
        self._key_base = (index + 1) * 1_000_000
        self._keys = 0
        self.written: List[int] = []
        self.pending: Dict[int, _Pending] = {}
        nodes = sim.reachable_nodes()
        node = spec.node or nodes[index % len(nodes)]
        self.session = self._open_session(node)

    @property
    def name(self) -> str:
        return self.spec.name

    def _open_session(self, node: str) -> ClientSession:
        self._sessions += 1
        session = ClientSession(f"{self.name}/{self._sessions}", node)
        self.sim.register_session(session.session_id, self)
        return session

    def _move(self) -> None:
        """Retry with another node under a new session."""
        nodes = [n for n in self.sim.reachable_nodes() if n != self.session.node]
        target = self.rng.choice(nodes) if nodes else self.session.node
        logger.debug(f"{self.name} moves from {self.session.node} to {target}")
        self.session = self._open_session(target)

    def start(self) -> None:
        self.sim.schedule(self.spec.start_ms, self.step)

    def _stopped(self) -> bool:
        stop = self.spec.stop_ms
        return stop is not None and self.sim.now >= stop

    def _busy(self) -> bool:
        return any(p.kind != "poll" for p in self.pending.values())

    def step(self) -> None:
        if self._stopped():
            return
        if self.spec.mode == "open":
            self._issue()
            gap = self.rng.expovariate(self.spec.rate_per_s / 1000.0)
            self.sim.schedule(self.sim.now + gap, self.step)
        elif not self._busy() and not self._issue():
            self._next()

    def _issue(self) -> bool:
        """Send the next request; False when there is nothing to do yet."""
        if self.rng.random() < self.spec.read_ratio:
            keys = self.written or self.sim.committed_keys[self.spec.public]
            if keys:
                key = self.rng.choice(keys)
                request = Request("read_message", {"id": key, "public": self.spec.public})
                record = ReadRecord(self.name, self.sim.now)
                self.sim.metrics.reads.append(record)
                self._send(_Pending("read", record, key), request)
                return True
            if self.spec.read_ratio >= 1.0:
                return False
        key = self._key_base + self._keys
        self._keys += 1
        msg = "".join(self.rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(self.spec.payload_size))
        request = Request("write_message", {"id": key, "msg": msg, "public": self.spec.public})
        record = WriteRecord(self.name, self.sim.now, key)
        self.sim.metrics.writes.append(record)
        self._send(_Pending("write", record, key), request)
        return True

    def _send(self, pending: _Pending, request: Request) -> None:
        request_id = self._next_request
        self._next_request += 1
        self.pending[request_id] = pending
        self.sim.send_request(self.session.node, self.session.session_id, request_id, request)
        self.sim.schedule(self.sim.now + self.spec.timeout_ms, lambda: self.on_timeout(request_id))

    def _poll(self, record: WriteRecord) -> None:
        if record.final_status is not None:
            return
        request = Request(TX_STATUS_ENDPOINT, {"txid": record.txid})
        self._send(_Pending("poll", record), request)

    def _schedule_poll(self, record: WriteRecord) -> None:
        self.sim.schedule(
            self.sim.now + self.sim.config.simulation.status_poll_ms, lambda: self._poll(record)
        )

    def _next(self) -> None:
        if self.spec.mode == "closed":
            self.sim.schedule(self.sim.now + self.spec.think_ms, self.step)

    def on_reply(self, request_id: int, response: Response) -> None:
        pending = self.pending.pop(request_id, None)
        if pending is None:
            return
        now = self.sim.now
        if response.status is ResponseStatus.SESSION_TERMINATED:
            self.sim.trace.record(
                {
                    "type": "session-terminated",
                    "client": self.name,
                    "node": self.session.node,
                    "session": self.session.session_id,
                    "time": now,
                }
            )
            self.session = self._open_session(self.session.node)
        elif response.status is ResponseStatus.UNAVAILABLE:
            self._move()

        if pending.kind == "poll":
            self._on_status(pending.record, response)
            return

        record = pending.record
        record.responded_at = now
        record.ok = response.ok
        if pending.kind == "write" and response.ok:
            record.txid = str(response.txid)
            self.written.append(pending.key)
            self.sim.trace.record(
                {"type": "response", "client": self.name, "time": now, "txid": record.txid}
            )
            if self.spec.await_commit:
                self._schedule_poll(record)
        self._next()

    def _on_status(self, record: WriteRecord, response: Response) -> None:
        if not response.ok:
            self._schedule_poll(record)
            return
        status = response.body
        if status in FINAL_STATUSES:
            record.final_status = status
            record.final_at = self.sim.now
            if status == "Committed":
                self.sim.committed_keys[self.spec.public].append(record.key)
            self.sim.trace.record(
                {
                    "type": "status",
                    "client": self.name,
                    "time": self.sim.now,
                    "txid": record.txid,
                    "status": status,
                }
            )
            return
        self._schedule_poll(record)

    def on_timeout(self, request_id: int) -> None:
        pending = self.pending.pop(request_id, None)
        if pending is None:
            return
        self._move()
        if pending.kind == "poll":
            self._poll(pending.record)
            return
        self._next()
