"""
Constitutions for consortium governance.

This module implements the Strategy Pattern for proposal resolution: a
constitution decides, from the evaluated ballots, whether a proposal is
Accepted, Rejected or still Open. The active constitution is stored as a
JSON document in the constitution map and rebuilt by ConstitutionFactory:

    {"name": "majority"}
    {"name": "weighted", "weights": {"m0": 2}, "veto": ["m1"]}
    {"name": "per_action", "thresholds": {"set_constitution": 1.0}, "default": 0.5}
    {"name": "operator", "operator": "m0"}
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, Generic, List, Optional, Tuple, TypeVar

from consortium_ledger.common.encoding import canonical_json, parse_json
from consortium_ledger.common.exceptions import GovernanceError
from consortium_ledger.governance.model import Proposal, ProposalState
from consortium_ledger.kv.maps import CONSTITUTION, CONSTITUTION_KEY
from consortium_ledger.kv.records import active_members

logger = logging.getLogger("consortium_ledger.governance")

T = TypeVar("T")

DEFAULT_CONSTITUTION = {"name": "majority"}
OPERATOR_ACTIONS = frozenset({"transition_node_to_trusted", "remove_node"})


class Constitution(ABC):
    """
    Abstract base class for constitutions.

    resolve never writes; applying the actions of an accepted proposal is the
    governance engine's job.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Get the name of this constitution."""
        pass

    @abstractmethod
    def resolve(
        self,
        proposal: Proposal,
        proposer: str,
        votes: Dict[str, bool],
        reader,
    ) -> ProposalState:
        """
        Decide a proposal.

        Args:
            proposal: The proposal being decided
            proposer: Member id of the proposer
            votes: Evaluated ballots; abstentions are absent
            reader: Store or transaction to read governance state from

        Returns:
            ACCEPTED, REJECTED or OPEN
        """
        pass

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name}


def _tally(votes: Dict[str, bool], members: List[str]) -> Tuple[int, int]:
    in_favour = sum(1 for m in members if votes.get(m) is True)
    against = sum(1 for m in members if votes.get(m) is False)
    return in_favour, against


class MajorityConstitution(Constitution):
    """Accept once a strict majority of members vote for."""

    @property
    def name(self) -> str:
        return "majority"

    def resolve(self, proposal, proposer, votes, reader) -> ProposalState:
        members = sorted(active_members(reader))
        in_favour, against = _tally(votes, members)
        needed = len(members) // 2 + 1
        if in_favour >= needed:
            return ProposalState.ACCEPTED
        if len(members) - against < needed:
            return ProposalState.REJECTED
        return ProposalState.OPEN


class WeightedConstitution(Constitution):
    """
    Accept once votes for carry more than half the total weight, unless a
    veto member votes against.
    """

    def __init__(self, weights: Optional[Dict[str, int]] = None, veto: Optional[List[str]] = None):
        self.weights = dict(weights or {})
        self.veto = sorted(veto or [])
        if any(not isinstance(w, int) or w < 0 for w in self.weights.values()):
            raise GovernanceError("weights must be non-negative integers", action="set_constitution")

    @property
    def name(self) -> str:
        return "weighted"

    def resolve(self, proposal, proposer, votes, reader) -> ProposalState:
        members = sorted(active_members(reader))
        if any(votes.get(m) is False for m in self.veto if m in members):
            return ProposalState.REJECTED
        weight = {m: self.weights.get(m, 1) for m in members}
        total = sum(weight.values())
        in_favour = sum(weight[m] for m in members if votes.get(m) is True)
        against = sum(weight[m] for m in members if votes.get(m) is False)
        if in_favour * 2 > total:
            return ProposalState.ACCEPTED
        if (total - against) * 2 <= total:
            return ProposalState.REJECTED
        return ProposalState.OPEN

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "weights": self.weights, "veto": self.veto}


class PerActionConstitution(Constitution):
    """
    Each action has its own approval fraction; a proposal needs the highest
    fraction among its actions.
    """

    def __init__(self, thresholds: Optional[Dict[str, float]] = None, default: float = 0.5):
        self.thresholds = {k: float(v) for k, v in (thresholds or {}).items()}
        self.default = float(default)
        for value in [self.default, *self.thresholds.values()]:
            if not 0.0 <= value <= 1.0:
                raise GovernanceError("thresholds must lie in [0, 1]", action="set_constitution")

    @property
    def name(self) -> str:
        return "per_action"

    def required_fraction(self, proposal: Proposal) -> float:
        return max(
            [self.thresholds.get(a, self.default) for a in proposal.action_names()]
            or [self.default]
        )

    def resolve(self, proposal, proposer, votes, reader) -> ProposalState:
        members = sorted(active_members(reader))
        in_favour, against = _tally(votes, members)
        fraction = self.required_fraction(proposal)

        def passes(count: int) -> bool:
            # fraction 1.0 means unanimity, anything lower is a strict bound
            if fraction >= 1.0:
                return count == len(members)
            return count > fraction * len(members)

        if passes(in_favour):
            return ProposalState.ACCEPTED
        if not passes(len(members) - against):
            return ProposalState.REJECTED
        return ProposalState.OPEN

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "thresholds": self.thresholds, "default": self.default}


class OperatorConstitution(MajorityConstitution):
    """
    Strict majority, except that the operator member may add and remove
    nodes on its own.
    """

    def __init__(self, operator: str):
        self.operator = operator

    @property
    def name(self) -> str:
        return "operator"

    def resolve(self, proposal, proposer, votes, reader) -> ProposalState:
        if (
            proposer == self.operator
            and proposal.actions
            and set(proposal.action_names()) <= OPERATOR_ACTIONS
        ):
            return ProposalState.ACCEPTED
        return super().resolve(proposal, proposer, votes, reader)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "operator": self.operator}


class Factory(ABC, Generic[T]):
    @abstractmethod
    def create(self, *args, **kwargs) -> T:
        pass


class ConstitutionFactory(Factory[Constitution]):
    """Build constitutions from their stored JSON documents."""

    def create(self, doc: Dict[str, Any]) -> Constitution:
        """
        Raises:
            GovernanceError: If the document names no known constitution
        """
        if not isinstance(doc, dict):
            raise GovernanceError("constitution must be an object", action="set_constitution")
        name = doc.get("name")
        try:
            if name == "majority":
                return MajorityConstitution()
            if name == "weighted":
                return WeightedConstitution(doc.get("weights"), doc.get("veto"))
            if name == "per_action":
                return PerActionConstitution(doc.get("thresholds"), doc.get("default", 0.5))
            if name == "operator":
                operator = doc.get("operator")
                if not isinstance(operator, str):
                    raise GovernanceError("operator constitution needs an operator member")
                return OperatorConstitution(operator)
        except (TypeError, ValueError) as e:
            raise GovernanceError(f"malformed constitution: {e}", action="set_constitution")
        raise GovernanceError(f"unknown constitution {name!r}", action="set_constitution")


def load_constitution(reader, factory: Optional[ConstitutionFactory] = None) -> Constitution:
    value = reader.get(CONSTITUTION, CONSTITUTION_KEY)
    doc = parse_json(value) if value is not None else DEFAULT_CONSTITUTION
    return (factory or ConstitutionFactory()).create(doc)


def store_constitution(tx, constitution: Constitution) -> None:
    tx.put(CONSTITUTION, CONSTITUTION_KEY, canonical_json(constitution.to_dict()))
