"""
Governance records: members, signed requests, proposals and their status.

Every governance request is a member-signed document:

    {"body": <canonical JSON text>, "kind": "proposal" | "ballot" | "recovery_share",
     "member_id": "m0", "signature": <hex Ed25519 over the signed message>}

The signed message is canonical_json({"body", "kind", "member_id"}). The
request is stored verbatim in the history map, so anyone holding the public
ledger can re-check it. A proposal's id is the digest of its signed request.
"""

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from consortium_ledger.common.encoding import canonical_json, from_hex, parse_json
from consortium_ledger.common.exceptions import EncodingError
from consortium_ledger.crypto.primitives import (
    EncryptionKeyPair,
    KeyPair,
    hash_bytes,
    sign,
    verify,
)


class RequestKind(str, Enum):
    PROPOSAL = "proposal"
    BALLOT = "ballot"
    RECOVERY_SHARE = "recovery_share"


class ProposalState(str, Enum):
    OPEN = "Open"
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    INVALIDATED = "Invalidated"
    # Accepted, but applying its actions failed; nothing was written
    FAILED = "Failed"

    @property
    def is_closed(self) -> bool:
        return self is not ProposalState.OPEN


@dataclass(frozen=True)
class MemberIdentity:
    """A member's private key material, held by the member (or the simulator)."""

    member_id: str
    signing: KeyPair
    encryption: EncryptionKeyPair

    @classmethod
    def generate(cls, member_id: str, rng: random.Random) -> "MemberIdentity":
        return cls(member_id, KeyPair.generate(rng), EncryptionKeyPair.generate(rng))

    def to_dict(self) -> Dict[str, str]:
        return {
            "member_id": self.member_id,
            "signing_secret": self.signing.secret.hex(),
            "encryption_secret": self.encryption.secret.hex(),
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, str]) -> "MemberIdentity":
        try:
            return cls(
                member_id=doc["member_id"],
                signing=KeyPair.from_secret(from_hex(doc["signing_secret"])),
                encryption=EncryptionKeyPair.from_secret(
                    from_hex(doc["encryption_secret"])
                ),
            )
        except KeyError as e:
            raise EncodingError(f"member key file is missing {e}")

    def public_record(self) -> Dict[str, str]:
        return {
            "member_id": self.member_id,
            "public_id": self.signing.public_id.hex(),
            "encryption_public_key": self.encryption.public_key.hex(),
        }


@dataclass(frozen=True)
class SignedRequest:
    member_id: str
    kind: RequestKind
    body: bytes
    signature: bytes

    @staticmethod
    def signed_message(member_id: str, kind: RequestKind, body: bytes) -> bytes:
        return canonical_json(
            {"body": body.decode("utf-8"), "kind": kind.value, "member_id": member_id}
        )

    @classmethod
    def create(
        cls, member: MemberIdentity, kind: RequestKind, body: Dict[str, Any]
    ) -> "SignedRequest":
        encoded = canonical_json(body)
        message = cls.signed_message(member.member_id, kind, encoded)
        return cls(member.member_id, kind, encoded, sign(member.signing, message))

    def verify(self, public_id: bytes) -> bool:
        return verify(
            public_id,
            self.signed_message(self.member_id, self.kind, self.body),
            self.signature,
        )

    @property
    def digest(self) -> str:
        return hash_bytes(self.to_bytes()).hex()

    def parsed_body(self) -> Dict[str, Any]:
        doc = parse_json(self.body)
        if not isinstance(doc, dict):
            raise EncodingError("request body must be an object")
        return doc

    def to_bytes(self) -> bytes:
        return canonical_json(
            {
                "body": self.body.decode("utf-8"),
                "kind": self.kind.value,
                "member_id": self.member_id,
                "signature": self.signature.hex(),
            }
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SignedRequest":
        doc = parse_json(data)
        try:
            return cls(
                member_id=str(doc["member_id"]),
                kind=RequestKind(doc["kind"]),
                body=str(doc["body"]).encode("utf-8"),
                signature=from_hex(doc["signature"], "signature"),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise EncodingError(f"malformed signed request: {e}")


@dataclass(frozen=True)
class Action:
    name: str
    args: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "args": self.args}


@dataclass(frozen=True)
class Proposal:
    actions: List[Action]
    # distinguishes otherwise identical proposals
    nonce: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"actions": [a.to_dict() for a in self.actions], "nonce": self.nonce}

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "Proposal":
        try:
            actions = [Action(a["name"], dict(a.get("args", {}))) for a in doc["actions"]]
        except (KeyError, TypeError) as e:
            raise EncodingError(f"malformed proposal: {e}")
        return cls(actions, str(doc.get("nonce", "")))

    def action_names(self) -> List[str]:
        return [a.name for a in self.actions]


@dataclass
class ProposalInfo:
    proposer: str
    state: ProposalState
    ballots: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    votes: Dict[str, bool] = field(default_factory=dict)
    failure: Optional[str] = None

    def to_bytes(self) -> bytes:
        return canonical_json(
            {
                "proposer": self.proposer,
                "state": self.state.value,
                "ballots": self.ballots,
                "votes": self.votes,
                "failure": self.failure,
            }
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProposalInfo":
        doc = parse_json(data)
        return cls(
            proposer=doc["proposer"],
            state=ProposalState(doc["state"]),
            ballots=dict(doc.get("ballots", {})),
            votes={k: bool(v) for k, v in doc.get("votes", {}).items()},
            failure=doc.get("failure"),
        )
