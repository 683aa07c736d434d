"""
Endpoint execution against the store.

An application is a set of named endpoints. Each endpoint runs once inside a
fresh transaction over the node's latest applied version and either returns
a response body (its writes become the transaction's write-set) or raises,
in which case the writes are discarded. Read-only endpoints never produce a
ledger entry; their response carries the last applied transaction id.
"""

import logging
from abc import ABC
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional

from consortium_ledger.common.exceptions import ConsortiumLedgerError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.crypto.primitives import Digest, hash_bytes
from consortium_ledger.kv.maps import APP_MESSAGES, APP_PUBLIC_MESSAGES
from consortium_ledger.kv.store import StoreState
from consortium_ledger.kv.transaction import Tx
from consortium_ledger.kv.write_set import WriteSet

logger = logging.getLogger("consortium_ledger.kv.endpoints")


class ResponseStatus(str, Enum):
    OK = "ok"
    ERROR = "error"
    NOT_PRIMARY = "not_primary"
    UNAVAILABLE = "unavailable"
    SERVICE_NOT_OPEN = "service_not_open"
    SESSION_TERMINATED = "session_terminated"


@dataclass(frozen=True)
class Request:
    endpoint: str
    args: Dict[str, Any] = field(default_factory=dict)
    claims: Optional[bytes] = None


@dataclass(frozen=True)
class Response:
    status: ResponseStatus
    body: Any = None
    txid: Optional[TransactionId] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status is ResponseStatus.OK

    @classmethod
    def failed(cls, status: ResponseStatus, error: str) -> "Response":
        return cls(status=status, error=error)


@dataclass
class ExecutionResult:
    """Outcome of running one endpoint; write_set is None for read-only runs."""

    response: Response
    write_set: Optional[WriteSet]
    claims_digest: Optional[Digest] = None


class EndpointError(ConsortiumLedgerError):
    """Raised by endpoint logic to return an error response."""

    def __init__(self, message: str):
        super().__init__(message, exit_code=1)


@dataclass(frozen=True)
class Endpoint:
    name: str
    handler: Callable[[Tx, Dict[str, Any]], Any]
    read_only: bool


def endpoint(name: str, read_only: bool = False):
    """Mark an Application method as the endpoint `name`."""

    def decorate(func):
        func._endpoint = (name, read_only)
        return func

    return decorate


class Application(ABC):
    """
    Base class for applications; subclasses declare endpoints with @endpoint.
    """

    def __init__(self):
        self.endpoints: Dict[str, Endpoint] = {}
        for attr in dir(type(self)):
            marker = getattr(getattr(type(self), attr), "_endpoint", None)
            if marker:
                name, read_only = marker
                self.endpoints[name] = Endpoint(name, getattr(self, attr), read_only)

    @property
    def name(self) -> str:
        return type(self).__name__

    def is_read_only(self, endpoint_name: str) -> bool:
        ep = self.endpoints.get(endpoint_name)
        return ep.read_only if ep else False

    def has_endpoint(self, endpoint_name: str) -> bool:
        return endpoint_name in self.endpoints


class LoggingApp(Application):
    """
    Message log: messages posted under numeric ids, later read back.

    Private messages land in app.msgs and are encrypted on the ledger;
    public ones in public:app.msgs.
    """

    @staticmethod
    def _key(args: Dict[str, Any]) -> bytes:
        try:
            return str(int(args["id"])).encode()
        except (KeyError, TypeError, ValueError):
            raise EndpointError("argument 'id' must be an integer")

    @endpoint("write_message")
    def write_message(self, tx: Tx, args: Dict[str, Any]) -> Any:
        key = self._key(args)
        msg = args.get("msg")
        if not isinstance(msg, str):
            raise EndpointError("argument 'msg' must be a string")
        table = APP_PUBLIC_MESSAGES if args.get("public") else APP_MESSAGES
        tx.put(table, key, msg.encode("utf-8"))
        return True

    @endpoint("read_message", read_only=True)
    def read_message(self, tx: Tx, args: Dict[str, Any]) -> Any:
        key = self._key(args)
        table = APP_PUBLIC_MESSAGES if args.get("public") else APP_MESSAGES
        value = tx.get(table, key)
        if value is None:
            raise EndpointError(f"no message with id {args['id']}")
        return value.decode("utf-8")

    @endpoint("remove_message")
    def remove_message(self, tx: Tx, args: Dict[str, Any]) -> Any:
        key = self._key(args)
        table = APP_PUBLIC_MESSAGES if args.get("public") else APP_MESSAGES
        tx.remove(table, key)
        return True

    @endpoint("write_then_read")
    def write_then_read(self, tx: Tx, args: Dict[str, Any]) -> Any:
        """Write and read back inside one transaction."""
        self.write_message(tx, args)
        return self.read_message(tx, args)


def execute_endpoint(
    store: StoreState, app: Application, request: Request
) -> ExecutionResult:
    """
    Run one request against the latest applied version of the store.

    Unknown endpoints and endpoint errors produce an error response with no
    write-set. A read-only endpoint (or any run that wrote nothing) returns
    write_set=None and the last applied txid.
    """
    ep = app.endpoints.get(request.endpoint)
    if ep is None:
        return ExecutionResult(
            Response.failed(ResponseStatus.ERROR, f"unknown endpoint {request.endpoint}"),
            None,
        )

    tx = Tx(store)
    try:
        body = ep.handler(tx, dict(request.args))
    except ConsortiumLedgerError as e:
        logger.debug(f"Endpoint {ep.name} failed: {e.message}")
        return ExecutionResult(Response.failed(ResponseStatus.ERROR, e.message), None)

    if ep.read_only or tx.is_read_only:
        return ExecutionResult(
            Response(ResponseStatus.OK, body=body, txid=store.applied_upto), None
        )

    claims = hash_bytes(request.claims) if request.claims is not None else None
    return ExecutionResult(Response(ResponseStatus.OK, body=body), tx.write_set, claims)
