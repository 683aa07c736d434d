"""
Tests for proposal and ballot processing.
"""

import dataclasses
import random
import unittest

from consortium_ledger.common.txid import TransactionId
from consortium_ledger.crypto import SymmetricSecret
from consortium_ledger.governance import (
    ActionContext,
    GovernanceEngine,
    MemberIdentity,
    Proposal,
    ProposalState,
    RequestKind,
    SignedRequest,
    read_proposal_info,
)
from consortium_ledger.governance.model import Action
from consortium_ledger.kv import StoreState, Tx
from consortium_ledger.kv.maps import (
    HISTORY,
    LEDGER_SECRET,
    MEMBERS_CERTS,
    MEMBERS_KEYS,
    RECOVERY_SHARES,
    USERS_CERTS,
)
from consortium_ledger.kv.records import NodeInfo, NodeStatus, read_node, write_node
from consortium_ledger.result import ErrorType

USER_KEY = "ab" * 32


def set_user(user_id="u0"):
    return Action("set_user", {"user_id": user_id, "public_id": USER_KEY})


class GovernanceTestCase(unittest.TestCase):
    def setUp(self):
        self.members = [
            MemberIdentity.generate(f"m{i}", random.Random(f"gov:m{i}")) for i in range(3)
        ]
        store = StoreState()
        setup = Tx(store, privileged=True)
        for member in self.members:
            setup.put(MEMBERS_CERTS, member.member_id.encode(), member.signing.public_id)
            setup.put(MEMBERS_KEYS, member.member_id.encode(), member.encryption.public_key)
        write_node(setup, "n1", NodeInfo(NodeStatus.PENDING, b"\x01" * 32, "code", b"\x02" * 64))
        store.apply(TransactionId(1, 1), setup.write_set)
        self.tx = Tx(store, privileged=True)
        self.engine = GovernanceEngine()
        secret = SymmetricSecret.generate(random.Random("secret"))
        self.ctx = ActionContext(random.Random("gov actions"), secret)

    def propose(self, member, *actions, nonce=""):
        body = Proposal(list(actions), nonce).to_dict()
        request = SignedRequest.create(member, RequestKind.PROPOSAL, body)
        return self.engine.submit(self.tx, request, self.ctx)

    def ballot(self, member, proposal_id, doc=None):
        body = {"proposal_id": proposal_id, "ballot": doc if doc is not None else {"vote": True}}
        request = SignedRequest.create(member, RequestKind.BALLOT, body)
        return self.engine.submit(self.tx, request, self.ctx)

    def accept(self, *actions, nonce=""):
        proposal_id = self.propose(self.members[0], *actions, nonce=nonce).unwrap()["proposal_id"]
        self.ballot(self.members[0], proposal_id).unwrap()
        return proposal_id, self.ballot(self.members[1], proposal_id).unwrap()

    def state(self, proposal_id):
        return read_proposal_info(self.tx, proposal_id).state


class TestProposalFlow(GovernanceTestCase):
    def test_majority_accepts_and_applies(self):
        proposed = self.propose(self.members[0], set_user()).unwrap()
        self.assertEqual(proposed["state"], "Open")
        proposal_id = proposed["proposal_id"]
        self.assertEqual(self.ballot(self.members[0], proposal_id).unwrap()["state"], "Open")
        self.assertIsNone(self.tx.get(USERS_CERTS, b"u0"))
        self.assertEqual(self.ballot(self.members[1], proposal_id).unwrap()["state"], "Accepted")
        self.assertEqual(self.tx.get(USERS_CERTS, b"u0"), bytes.fromhex(USER_KEY))

    def test_requests_recorded_verbatim(self):
        body = Proposal([set_user()]).to_dict()
        request = SignedRequest.create(self.members[0], RequestKind.PROPOSAL, body)
        proposal_id = self.engine.submit(self.tx, request, self.ctx).unwrap()["proposal_id"]
        self.assertEqual(proposal_id, request.digest)
        stored = SignedRequest.from_bytes(self.tx.get(HISTORY, proposal_id.encode()))
        self.assertEqual(stored, request)
        self.assertTrue(stored.verify(self.members[0].signing.public_id))

    def test_resubmitted_proposal_is_the_same(self):
        first = self.propose(self.members[0], set_user()).unwrap()
        self.assertEqual(self.propose(self.members[0], set_user()).unwrap(), first)
        other = self.propose(self.members[0], set_user(), nonce="again").unwrap()
        self.assertNotEqual(other["proposal_id"], first["proposal_id"])

    def test_majority_against_rejects(self):
        proposal_id = self.propose(self.members[0], set_user()).unwrap()["proposal_id"]
        self.ballot(self.members[1], proposal_id, {"vote": False})
        result = self.ballot(self.members[2], proposal_id, {"vote": False}).unwrap()
        self.assertEqual(result["state"], "Rejected")
        self.assertIsNone(self.tx.get(USERS_CERTS, b"u0"))


class TestRequestErrors(GovernanceTestCase):
    def assertFailsWith(self, result, error_type):
        self.assertTrue(result.is_failure())
        self.assertEqual(result.error().type, error_type)

    def test_duplicate_ballot(self):
        proposal_id = self.propose(self.members[0], set_user()).unwrap()["proposal_id"]
        self.ballot(self.members[2], proposal_id, {"vote": False}).unwrap()
        self.assertFailsWith(self.ballot(self.members[2], proposal_id), ErrorType.DUPLICATE_BALLOT)

    def test_ballot_on_closed_proposal(self):
        proposal_id, _ = self.accept(set_user())
        self.assertFailsWith(self.ballot(self.members[2], proposal_id), ErrorType.PROPOSAL_CLOSED)

    def test_unknown_proposal(self):
        self.assertFailsWith(self.ballot(self.members[0], "ff" * 32), ErrorType.UNKNOWN_PROPOSAL)

    def test_unknown_member(self):
        outsider = MemberIdentity.generate("m9", random.Random("outsider"))
        self.assertFailsWith(self.propose(outsider, set_user()), ErrorType.UNKNOWN_MEMBER)

    def test_signature_of_another_member(self):
        body = Proposal([set_user()]).to_dict()
        request = SignedRequest.create(self.members[0], RequestKind.PROPOSAL, body)
        forged = dataclasses.replace(request, member_id="m1")
        self.assertFailsWith(self.engine.submit(self.tx, forged, self.ctx), ErrorType.BAD_SIGNATURE)
        self.assertEqual(list(self.tx.items(HISTORY)), [])

    def test_malformed_bodies(self):
        request = SignedRequest.create(self.members[0], RequestKind.PROPOSAL, {"nothing": 1})
        self.assertFailsWith(self.engine.submit(self.tx, request, self.ctx), ErrorType.INVALID_ARGUMENT)
        proposal_id = self.propose(self.members[0], set_user()).unwrap()["proposal_id"]
        self.assertFailsWith(
            self.ballot(self.members[0], proposal_id, {"vote": "yes"}), ErrorType.INVALID_ARGUMENT
        )


class TestActions(GovernanceTestCase):
    def test_failing_action_writes_nothing(self):
        proposal_id, result = self.accept(
            set_user("u1"), Action("transition_node_to_trusted", {"node_id": "n9"})
        )
        self.assertEqual(result["state"], "Failed")
        info = read_proposal_info(self.tx, proposal_id)
        self.assertIn("n9", info.failure)
        self.assertIsNone(self.tx.get(USERS_CERTS, b"u1"))

    def test_unknown_action_fails(self):
        _, result = self.accept(Action("launch_rockets"))
        self.assertEqual(result["state"], "Failed")

    def test_node_lifecycle(self):
        self.accept(Action("transition_node_to_trusted", {"node_id": "n1"}))
        self.assertIs(read_node(self.tx, "n1").status, NodeStatus.TRUSTED)
        self.accept(Action("remove_node", {"node_id": "n1"}))
        self.assertIs(read_node(self.tx, "n1").status, NodeStatus.RETIRING)
        # RETIRING cannot become TRUSTED again
        _, result = self.accept(Action("transition_node_to_trusted", {"node_id": "n1"}), nonce="back")
        self.assertEqual(result["state"], "Failed")

    def test_new_code_invalidates_open_proposals(self):
        pending = self.propose(self.members[0], set_user()).unwrap()["proposal_id"]
        code, result = self.accept(Action("add_node_code", {"code_id": "v2"}))
        self.assertEqual(result["state"], "Accepted")
        self.assertIs(self.state(pending), ProposalState.INVALIDATED)
        self.assertIs(self.state(code), ProposalState.ACCEPTED)

    def test_conditional_ballot_abstains(self):
        proposal_id = self.propose(self.members[0], set_user()).unwrap()["proposal_id"]
        for member in self.members[:2]:
            self.ballot(member, proposal_id, {"vote": True, "if_proposal_has_action": "set_app"})
        info = read_proposal_info(self.tx, proposal_id)
        self.assertIs(info.state, ProposalState.OPEN)
        self.assertEqual(info.votes, {})
        self.assertEqual(len(info.ballots), 2)

    def test_constitution_change_takes_effect(self):
        self.accept(Action("set_constitution", {"constitution": {"name": "operator", "operator": "m2"}}))
        result = self.propose(
            self.members[2], Action("transition_node_to_trusted", {"node_id": "n1"})
        ).unwrap()
        self.assertEqual(result["state"], "Accepted")
        self.assertIs(read_node(self.tx, "n1").status, NodeStatus.TRUSTED)

    def test_recovery_threshold_issues_shares(self):
        _, result = self.accept(Action("set_recovery_threshold", {"threshold": 2}))
        self.assertEqual(result["state"], "Accepted")
        self.assertIsNotNone(self.tx.get(LEDGER_SECRET, b"wrapped"))
        self.assertEqual([k for k, _ in self.tx.items(RECOVERY_SHARES)], [b"m0", b"m1", b"m2"])
        _, too_high = self.accept(Action("set_recovery_threshold", {"threshold": 4}), nonce="4")
        self.assertEqual(too_high["state"], "Failed")

    def test_recovery_threshold_needs_ledger_secret(self):
        self.ctx = ActionContext(random.Random("no secret"), None)
        _, result = self.accept(Action("set_recovery_threshold", {"threshold": 2}))
        self.assertEqual(result["state"], "Failed")


if __name__ == "__main__":
    unittest.main()
