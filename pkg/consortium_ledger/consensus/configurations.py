"""
Active configurations.

A configuration is the set of TRUSTED nodes written by a reconfiguration
entry. While reconfigurations are uncommitted, several configurations are
active at once and every commit or election needs a majority in each of them.
"""

import logging
from dataclasses import dataclass
from typing import AbstractSet, FrozenSet, Iterable, List

logger = logging.getLogger("consortium_ledger.consensus")


@dataclass(frozen=True)
class Configuration:
    seqno: int
    nodes: FrozenSet[str]

    def has_quorum(self, acks: AbstractSet[str]) -> bool:
        if not self.nodes:
            return False
        return len(self.nodes & frozenset(acks)) * 2 > len(self.nodes)

    def to_list(self) -> list:
        return [self.seqno, sorted(self.nodes)]


class ActiveConfigurations:
    """
    Ordered by seqno, oldest first; the last one is the current configuration.

    The list is only empty on a node that has not yet received the genesis
    entry.
    """

    def __init__(self, configurations: Iterable[Configuration] = (), committed_seqno: int = 0):
        self._configs: List[Configuration] = sorted(configurations, key=lambda c: c.seqno)
        self._committed = committed_seqno

    def __iter__(self):
        return iter(self._configs)

    def __len__(self) -> int:
        return len(self._configs)

    @property
    def current(self) -> FrozenSet[str]:
        return self._configs[-1].nodes if self._configs else frozenset()

    @property
    def all_nodes(self) -> FrozenSet[str]:
        nodes = frozenset()
        for config in self._configs:
            nodes |= config.nodes
        return nodes

    @property
    def is_stable(self) -> bool:
        return len(self._configs) <= 1

    def contains(self, node_id: str) -> bool:
        return any(node_id in c.nodes for c in self._configs)

    def first_containing(self, node_id: str):
        for config in self._configs:
            if node_id in config.nodes:
                return config
        return None

    def has_quorum(self, acks: AbstractSet[str]) -> bool:
        return bool(self._configs) and all(c.has_quorum(acks) for c in self._configs)

    def add(self, seqno: int, nodes: FrozenSet[str]) -> None:
        if self._configs and seqno <= self._configs[-1].seqno:
            raise ValueError(f"configuration at {seqno} is not newer than the current one")
        self._configs.append(Configuration(seqno, frozenset(nodes)))
        logger.debug(f"Configuration {sorted(nodes)} active at {seqno}")

    def commit(self, seqno: int) -> List[Configuration]:
        """
        Drop every configuration older than the newest committed one.

        Returns:
            Configurations that became committed by this call
        """
        newly = [c for c in self._configs if self._committed < c.seqno <= seqno]
        self._committed = max(self._committed, seqno)
        committed = [c for c in self._configs if c.seqno <= seqno]
        if len(committed) > 1:
            self._configs = self._configs[len(committed) - 1 :]
        return newly

    def rollback(self, seqno: int) -> None:
        self._configs = [c for c in self._configs if c.seqno <= seqno]

    def reset(self, seqno: int, nodes: FrozenSet[str]) -> None:
        self._configs = [Configuration(seqno, frozenset(nodes))]

    def to_list(self) -> list:
        return [c.to_list() for c in self._configs]
