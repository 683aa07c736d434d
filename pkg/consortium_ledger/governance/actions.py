"""
Built-in governance actions.

Each action validates its arguments and writes through a privileged
transaction. Any exception aborts the whole proposal: the engine runs all
actions of a proposal in one nested transaction and discards it on failure.
"""

import logging
import random
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional

from consortium_ledger.common.encoding import canonical_json, from_hex
from consortium_ledger.common.exceptions import (
    ConsortiumLedgerError,
    EncodingError,
    GovernanceError,
)
from consortium_ledger.crypto.primitives import SymmetricSecret
from consortium_ledger.governance.constitution import ConstitutionFactory, store_constitution
from consortium_ledger.kv.maps import (
    MEMBERS_CERTS,
    MEMBERS_KEYS,
    MODULES,
    NODES_CODE_IDS,
    USERS_CERTS,
)
from consortium_ledger.kv.records import (
    ALLOWED_TO_JOIN,
    NODE_TRANSITIONS,
    NodeStatus,
    ServiceStatus,
    read_node,
    read_service,
    read_service_config,
    write_node,
    write_service,
    write_service_config,
)
from consortium_ledger.recovery.secrets import issue_shares, recovery_threshold

logger = logging.getLogger("consortium_ledger.governance")


@dataclass
class ActionContext:
    """What actions may use beyond the transaction."""

    rng: random.Random
    ledger_secret: Optional[SymmetricSecret]
    proposal_id: str = ""
    # Set by actions that close every other open proposal
    invalidate_others: bool = False


ActionHandler = Callable[[Any, Dict[str, Any], ActionContext], None]

ACTIONS: Dict[str, ActionHandler] = {}


def action(name: str):
    def register(func: ActionHandler) -> ActionHandler:
        ACTIONS[name] = func
        return func

    return register


def _string(args: Dict[str, Any], name: str) -> str:
    value = args.get(name)
    if not isinstance(value, str) or not value:
        raise GovernanceError(f"argument {name!r} must be a non-empty string", action=name)
    return value


def _hex(args: Dict[str, Any], name: str) -> bytes:
    try:
        return from_hex(_string(args, name), name)
    except EncodingError as e:
        raise GovernanceError(e.message, action=name)


def _reissue(tx, ctx: ActionContext, threshold: int) -> None:
    if ctx.ledger_secret is None:
        raise GovernanceError("recovery shares cannot be issued without the ledger secret")
    try:
        issue_shares(tx, ctx.ledger_secret, threshold, ctx.rng)
    except ConsortiumLedgerError as e:
        raise GovernanceError(e.message, action="set_recovery_threshold")


@action("set_user")
def set_user(tx, args, ctx) -> None:
    tx.put(USERS_CERTS, _string(args, "user_id").encode(), _hex(args, "public_id"))


@action("set_member")
def set_member(tx, args, ctx) -> None:
    member_id = _string(args, "member_id").encode()
    tx.put(MEMBERS_CERTS, member_id, _hex(args, "public_id"))
    tx.put(MEMBERS_KEYS, member_id, _hex(args, "encryption_public_key"))
    threshold = recovery_threshold(tx)
    if threshold is not None and ctx.ledger_secret is not None:
        _reissue(tx, ctx, threshold)


@action("set_app")
def set_app(tx, args, ctx) -> None:
    modules = args.get("modules")
    if not isinstance(modules, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in modules.items()
    ):
        raise GovernanceError("argument 'modules' must map names to text", action="set_app")
    for key, _ in list(tx.items(MODULES)):
        tx.remove(MODULES, key)
    for name, text in modules.items():
        tx.put(MODULES, name.encode(), text.encode("utf-8"))


@action("add_node_code")
def add_node_code(tx, args, ctx) -> None:
    code_id = _string(args, "code_id")
    tx.put(NODES_CODE_IDS, code_id.encode(), canonical_json(ALLOWED_TO_JOIN))
    ctx.invalidate_others = True


def _transition_node(tx, node_id: str, status: NodeStatus, action_name: str) -> None:
    info = read_node(tx, node_id)
    if info is None:
        raise GovernanceError(f"unknown node {node_id}", action=action_name)
    if status not in NODE_TRANSITIONS[info.status]:
        raise GovernanceError(
            f"node {node_id} cannot move from {info.status.value} to {status.value}",
            action=action_name,
        )
    write_node(tx, node_id, info.with_status(status))


@action("transition_node_to_trusted")
def transition_node_to_trusted(tx, args, ctx) -> None:
    _transition_node(tx, _string(args, "node_id"), NodeStatus.TRUSTED, "transition_node_to_trusted")


@action("remove_node")
def remove_node(tx, args, ctx) -> None:
    node_id = _string(args, "node_id")
    info = read_node(tx, node_id)
    if info is not None and info.status is NodeStatus.PENDING:
        _transition_node(tx, node_id, NodeStatus.RETIRED, "remove_node")
    else:
        _transition_node(tx, node_id, NodeStatus.RETIRING, "remove_node")


@action("set_constitution")
def set_constitution(tx, args, ctx) -> None:
    doc = args.get("constitution")
    store_constitution(tx, ConstitutionFactory().create(doc))


@action("transition_service_to_open")
def transition_service_to_open(tx, args, ctx) -> None:
    service = read_service(tx)
    if service is None:
        raise GovernanceError("service has no identity yet", action="transition_service_to_open")
    if service.status is ServiceStatus.OPENING:
        write_service(tx, service.with_status(ServiceStatus.OPEN))
        return
    if service.status is ServiceStatus.RECOVERING:
        previous = _hex(args, "previous_identity")
        following = _hex(args, "next_identity")
        if previous != service.previous_identity or following != service.identity:
            raise GovernanceError(
                "service identities do not match the recovering service",
                action="transition_service_to_open",
            )
        write_service(tx, service.with_status(ServiceStatus.WAITING_FOR_RECOVERY_SHARES))
        return
    raise GovernanceError(
        f"service is {service.status.value}", action="transition_service_to_open"
    )


@action("set_recovery_threshold")
def set_recovery_threshold(tx, args, ctx) -> None:
    threshold = args.get("threshold")
    if not isinstance(threshold, int) or isinstance(threshold, bool):
        raise GovernanceError("argument 'threshold' must be an integer", action="set_recovery_threshold")
    config = read_service_config(tx)
    config["recovery_threshold"] = threshold
    write_service_config(tx, config)
    _reissue(tx, ctx, threshold)


def apply_action(tx, name: str, args: Dict[str, Any], ctx: ActionContext) -> None:
    """
    Raises:
        GovernanceError: For unknown actions, malformed arguments or invalid
            transitions
    """
    handler = ACTIONS.get(name)
    if handler is None:
        raise GovernanceError(f"unknown action {name!r}", action=name)
    if not isinstance(args, dict):
        raise GovernanceError("action arguments must be an object", action=name)
    logger.debug(f"Applying {name} for proposal {ctx.proposal_id[:12]}")
    handler(tx, args, ctx)
