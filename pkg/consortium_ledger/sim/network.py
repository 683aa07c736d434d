"""
Simulated network between nodes.

Links are point-to-point with a random delay. A message can be lost when it
is sent (random drop, sender and receiver in different partition groups)
or when it arrives (receiver crashed or partitioned away meanwhile). It is
never duplicated.
"""

import random
from typing import Iterable, List, Optional, Set

from consortium_ledger.config.config_models import SimulationConfig
from consortium_ledger.project_logging import get_logger

logger = get_logger("sim.network")


class Network:
    def __init__(self, config: SimulationConfig, rng: random.Random):
        self.rng = rng
        self.min_delay_ms = config.min_delay_ms
        self.max_delay_ms = config.max_delay_ms
        self.drop_rate = config.drop_rate
        self.groups: List[Set[str]] = []
        self.crashed: Set[str] = set()

    def partition(self, groups: Iterable[Iterable[str]]) -> None:
        """Only nodes within the same group can talk; unlisted nodes are isolated."""
        self.groups = [set(g) for g in groups]
        logger.info(f"Network partitioned into {[sorted(g) for g in self.groups]}")

    def heal(self) -> None:
        self.groups = []
        logger.info("Network healed")

    def reconfigure(
        self,
        min_delay_ms: Optional[float] = None,
        max_delay_ms: Optional[float] = None,
        drop_rate: Optional[float] = None,
    ) -> None:
        if min_delay_ms is not None:
            self.min_delay_ms = min_delay_ms
        if max_delay_ms is not None:
            self.max_delay_ms = max(max_delay_ms, self.min_delay_ms)
        if drop_rate is not None:
            self.drop_rate = drop_rate

    def connected(self, a: str, b: str) -> bool:
        if a in self.crashed or b in self.crashed:
            return False
        if not self.groups or a == b:
            return True
        return any(a in group and b in group for group in self.groups)

    def send_delay(self, sender: str, receiver: str) -> Optional[float]:
        """Delay for a new message, or None if it is lost."""
        if not self.connected(sender, receiver):
            return None
        if self.drop_rate and self.rng.random() < self.drop_rate:
            return None
        return self.rng.uniform(self.min_delay_ms, self.max_delay_ms)

    def client_delay(self) -> float:
        """Clients sit outside partitions; only the delay applies."""
        return self.rng.uniform(self.min_delay_ms, self.max_delay_ms)
