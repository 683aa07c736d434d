"""
Run metrics collected from client observations and node work.
"""

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import mean, median
from typing import Dict, List, Optional, Tuple, Union

from consortium_ledger.common.txid import TransactionId


@dataclass
class WriteRecord:
    client: str
    sent_at: float
    key: Optional[int] = None
    responded_at: Optional[float] = None
    ok: bool = False
    txid: Optional[str] = None
    final_status: Optional[str] = None
    final_at: Optional[float] = None


@dataclass
class ReadRecord:
    client: str
    sent_at: float
    responded_at: Optional[float] = None
    ok: bool = False


@dataclass
class RunMetrics:
    duration_ms: float
    writes_sent: int
    writes_ok: int
    writes_committed: int
    writes_invalid: int
    reads_ok: int
    write_throughput: float
    read_throughput: float
    work_units_per_s: float
    writes_per_work_s: Optional[float]
    mean_local_latency_ms: Optional[float]
    mean_time_to_commit_ms: Optional[float]
    median_time_to_commit_ms: Optional[float]
    max_write_gap_ms: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MetricsRecorder:
    interval_ms: float = 100.0
    writes: List[WriteRecord] = field(default_factory=list)
    reads: List[ReadRecord] = field(default_factory=list)
    work_ms: float = 0.0
    # (time, view, seqno) of every commit decided by a primary, in time order
    commits: List[Tuple[float, int, int]] = field(default_factory=list)

    def record_commit(self, at: float, view: int, seqno: int) -> None:
        self.commits.append((at, view, seqno))

    def commit_time(self, write: WriteRecord) -> Optional[float]:
        """
        When a primary first committed the write, falling back to when its
        client saw it committed.
        """
        if write.final_status != "Committed":
            return None
        txid = TransactionId.parse(write.txid)
        for at, view, seqno in self.commits:
            if at >= write.sent_at and view >= txid.view and seqno >= txid.seqno:
                return at
        return write.final_at

    def summary(self, duration_ms: float) -> RunMetrics:
        seconds = max(duration_ms, 1.0) / 1000.0
        ok = [w for w in self.writes if w.ok]
        committed = [w for w in ok if w.final_status == "Committed"]
        latencies = [w.responded_at - w.sent_at for w in ok]
        commit_times = [self.commit_time(w) - w.sent_at for w in committed]
        response_times = sorted(w.responded_at for w in ok)
        edges = [0.0] + response_times + [duration_ms]
        gap = max(b - a for a, b in zip(edges, edges[1:]))
        return RunMetrics(
            duration_ms=duration_ms,
            writes_sent=len(self.writes),
            writes_ok=len(ok),
            writes_committed=len(committed),
            writes_invalid=sum(1 for w in ok if w.final_status == "Invalid"),
            reads_ok=sum(1 for r in self.reads if r.ok),
            write_throughput=len(ok) / seconds,
            read_throughput=sum(1 for r in self.reads if r.ok) / seconds,
            work_units_per_s=self.work_ms / seconds,
            writes_per_work_s=len(ok) * 1000.0 / self.work_ms if self.work_ms else None,
            mean_local_latency_ms=mean(latencies) if latencies else None,
            mean_time_to_commit_ms=mean(commit_times) if commit_times else None,
            median_time_to_commit_ms=median(commit_times) if commit_times else None,
            max_write_gap_ms=gap,
        )

    def intervals(self, duration_ms: float) -> List[Dict[str, float]]:
        """Per-interval counts of successful writes, reads and commits."""
        buckets = int(duration_ms // self.interval_ms) + 1
        rows = [
            {"time_ms": i * self.interval_ms, "writes": 0, "reads": 0, "commits": 0}
            for i in range(buckets)
        ]

        def bucket(at: float) -> Optional[Dict[str, float]]:
            index = int(at // self.interval_ms)
            return rows[index] if 0 <= index < buckets else None

        for w in self.writes:
            if w.ok and bucket(w.responded_at) is not None:
                bucket(w.responded_at)["writes"] += 1
            committed_at = self.commit_time(w)
            if committed_at is not None and bucket(committed_at) is not None:
                bucket(committed_at)["commits"] += 1
        for r in self.reads:
            if r.ok and bucket(r.responded_at) is not None:
                bucket(r.responded_at)["reads"] += 1
        return rows


def write_csv(rows: List[Dict[str, object]], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        if rows:
            writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    return path
