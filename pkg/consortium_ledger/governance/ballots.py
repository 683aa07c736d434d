"""
Declarative ballots.

A ballot is a JSON object evaluated against the proposal and the current
store every time the proposal is resolved:

    {"vote": true}
    {"vote": true, "if_proposal_has_action": "add_node_code"}
    {"vote": false, "if_key_equals": {"map": "...", "key": "...", "value": "..."}}

With no condition the ballot always casts `vote`. With conditions, `vote` is
cast only when every condition holds; otherwise the member abstains.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional

from consortium_ledger.common.exceptions import ValidationError
from consortium_ledger.governance.model import Proposal

CONDITIONS = ("if_key_equals", "if_proposal_has_action")


@dataclass(frozen=True)
class Ballot:
    vote: bool
    key_condition: Optional[Dict[str, str]] = None
    action_condition: Optional[str] = None

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "Ballot":
        """
        Raises:
            ValidationError: If the ballot is not well formed
        """
        if not isinstance(doc, dict) or not isinstance(doc.get("vote"), bool):
            raise ValidationError("ballot needs a boolean 'vote'", field="vote")
        unknown = set(doc) - {"vote", *CONDITIONS}
        if unknown:
            raise ValidationError(f"unknown ballot fields {sorted(unknown)}", field="ballot")
        key_condition = doc.get("if_key_equals")
        if key_condition is not None:
            if not isinstance(key_condition, dict) or not all(
                isinstance(key_condition.get(f), str) for f in ("map", "key", "value")
            ):
                raise ValidationError(
                    "if_key_equals needs string map, key and value", field="if_key_equals"
                )
        action_condition = doc.get("if_proposal_has_action")
        if action_condition is not None and not isinstance(action_condition, str):
            raise ValidationError(
                "if_proposal_has_action must be an action name", field="if_proposal_has_action"
            )
        return cls(doc["vote"], key_condition, action_condition)

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {"vote": self.vote}
        if self.key_condition is not None:
            doc["if_key_equals"] = dict(self.key_condition)
        if self.action_condition is not None:
            doc["if_proposal_has_action"] = self.action_condition
        return doc

    def evaluate(self, proposal: Proposal, reader) -> Optional[bool]:
        """The vote cast, or None to abstain."""
        if self.action_condition is not None:
            if self.action_condition not in proposal.action_names():
                return None
        if self.key_condition is not None:
            value = reader.get(self.key_condition["map"], self.key_condition["key"].encode())
            if value is None or value.decode("utf-8", "replace") != self.key_condition["value"]:
                return None
        return self.vote


def vote_for() -> Ballot:
    return Ballot(True)


def vote_against() -> Ballot:
    return Ballot(False)
