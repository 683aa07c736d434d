from .endpoints import (
    Application,
    Endpoint,
    EndpointError,
    ExecutionResult,
    LoggingApp,
    Request,
    Response,
    ResponseStatus,
    endpoint,
    execute_endpoint,
)
from .maps import BUILTIN_MAPS, MapName, Visibility
from .records import NodeInfo, NodeStatus, ServiceInfo, ServiceStatus
from .snapshot import Snapshot, RestoredSnapshot, restore_snapshot, take_snapshot
from .store import StoreState
from .transaction import Tx
from .write_set import Update, WriteSet, decode_updates, encode_updates
