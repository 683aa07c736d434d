"""
Simulation traces.

A trace is the totally ordered list of everything that happened in a run:
node events (roles, votes, decisions, commits, truncations,
reconfigurations), faults, client responses and status observations. It is
stored as JSON lines with sorted keys, so equal runs give equal bytes.
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterator, List, Union

Event = Dict[str, Any]


class Trace:
    def __init__(self, events: List[Event] = None):
        self.events: List[Event] = list(events or [])

    def record(self, event: Event) -> None:
        self.events.append(event)

    def extend(self, events: List[Event]) -> None:
        self.events.extend(events)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def of_type(self, *types: str) -> List[Event]:
        return [e for e in self.events if e["type"] in types]

    def to_bytes(self) -> bytes:
        return "".join(
            json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n" for e in self.events
        ).encode("utf-8")

    def dump(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Trace":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls([json.loads(line) for line in lines if line.strip()])
