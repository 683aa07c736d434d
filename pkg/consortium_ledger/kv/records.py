"""
Typed records stored in the built-in governance maps.

Values are canonical JSON; bytes fields are hex. Readers accept either a
StoreState or a Tx (anything with get/items).
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

from consortium_ledger.common.encoding import canonical_json, from_hex, parse_json
from consortium_ledger.kv.maps import (
    CONFIG_KEY,
    MEMBERS_CERTS,
    MEMBERS_KEYS,
    NODES_CODE_IDS,
    NODES_INFO,
    SERVICE_CONFIG,
    SERVICE_INFO,
    SERVICE_KEY,
    USERS_CERTS,
)


class NodeStatus(str, Enum):
    PENDING = "PENDING"
    TRUSTED = "TRUSTED"
    RETIRING = "RETIRING"
    RETIRED = "RETIRED"


# Allowed lifecycle edges in nodes.info
NODE_TRANSITIONS = {
    None: {NodeStatus.PENDING, NodeStatus.TRUSTED},
    NodeStatus.PENDING: {NodeStatus.TRUSTED, NodeStatus.RETIRED},
    NodeStatus.TRUSTED: {NodeStatus.RETIRING},
    NodeStatus.RETIRING: {NodeStatus.RETIRED},
    NodeStatus.RETIRED: set(),
}


class ServiceStatus(str, Enum):
    OPENING = "Opening"
    OPEN = "Open"
    RECOVERING = "Recovering"
    WAITING_FOR_RECOVERY_SHARES = "WaitingForRecoveryShares"


ALLOWED_TO_JOIN = "AllowedToJoin"


@dataclass(frozen=True)
class NodeInfo:
    status: NodeStatus
    public_id: bytes
    code_id: str
    endorsement: bytes

    def to_bytes(self) -> bytes:
        return canonical_json(
            {
                "status": self.status.value,
                "public_id": self.public_id.hex(),
                "code_id": self.code_id,
                "endorsement": self.endorsement.hex(),
            }
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "NodeInfo":
        doc = parse_json(data)
        return cls(
            status=NodeStatus(doc["status"]),
            public_id=from_hex(doc["public_id"], "public_id"),
            code_id=doc["code_id"],
            endorsement=from_hex(doc["endorsement"], "endorsement"),
        )

    def with_status(self, status: NodeStatus) -> "NodeInfo":
        return NodeInfo(status, self.public_id, self.code_id, self.endorsement)


@dataclass(frozen=True)
class ServiceInfo:
    status: ServiceStatus
    identity: bytes
    previous_identity: Optional[bytes] = None

    def to_bytes(self) -> bytes:
        return canonical_json(
            {
                "status": self.status.value,
                "identity": self.identity.hex(),
                "previous_identity": (
                    self.previous_identity.hex() if self.previous_identity else None
                ),
            }
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "ServiceInfo":
        doc = parse_json(data)
        previous = doc.get("previous_identity")
        return cls(
            status=ServiceStatus(doc["status"]),
            identity=from_hex(doc["identity"], "identity"),
            previous_identity=from_hex(previous, "previous_identity") if previous else None,
        )

    def with_status(self, status: ServiceStatus) -> "ServiceInfo":
        return ServiceInfo(status, self.identity, self.previous_identity)


def read_nodes(reader) -> Dict[str, NodeInfo]:
    return {k.decode(): NodeInfo.from_bytes(v) for k, v in reader.items(NODES_INFO)}


def read_node(reader, node_id: str) -> Optional[NodeInfo]:
    value = reader.get(NODES_INFO, node_id.encode())
    return NodeInfo.from_bytes(value) if value is not None else None


def write_node(tx, node_id: str, info: NodeInfo) -> None:
    tx.put(NODES_INFO, node_id.encode(), info.to_bytes())


def trusted_nodes(reader) -> frozenset:
    return frozenset(
        node_id
        for node_id, info in read_nodes(reader).items()
        if info.status is NodeStatus.TRUSTED
    )


def read_service(reader) -> Optional[ServiceInfo]:
    value = reader.get(SERVICE_INFO, SERVICE_KEY)
    return ServiceInfo.from_bytes(value) if value is not None else None


def write_service(tx, info: ServiceInfo) -> None:
    tx.put(SERVICE_INFO, SERVICE_KEY, info.to_bytes())


def read_service_config(reader) -> dict:
    value = reader.get(SERVICE_CONFIG, CONFIG_KEY)
    return parse_json(value) if value is not None else {}


def write_service_config(tx, config: dict) -> None:
    tx.put(SERVICE_CONFIG, CONFIG_KEY, canonical_json(config))


def code_id_allowed(reader, code_id: str) -> bool:
    value = reader.get(NODES_CODE_IDS, code_id.encode())
    return value is not None and parse_json(value) == ALLOWED_TO_JOIN


def member_public_id(reader, member_id: str) -> Optional[bytes]:
    value = reader.get(MEMBERS_CERTS, member_id.encode())
    return value if value is None else bytes(value)


def active_members(reader) -> Dict[str, bytes]:
    return {k.decode(): v for k, v in reader.items(MEMBERS_CERTS)}


def member_encryption_keys(reader) -> Dict[str, bytes]:
    return {k.decode(): v for k, v in reader.items(MEMBERS_KEYS)}


def user_ids(reader) -> Dict[str, bytes]:
    return {k.decode(): v for k, v in reader.items(USERS_CERTS)}
