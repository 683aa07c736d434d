"""
Tests for a single service node driven by hand.
"""

import random
import unittest

from consortium_ledger.common.exceptions import ConsensusInvariantError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.consensus import JoinRequest
from consortium_ledger.governance import MemberIdentity, Proposal, RequestKind, SignedRequest
from consortium_ledger.governance.model import Action
from consortium_ledger.kv import NodeStatus, Request, ResponseStatus, ServiceStatus
from consortium_ledger.merkle import Receipt, verify_receipt
from consortium_ledger.node.node import NodeCore

from consortium_ledger.sim import run_scenario

from tests.fixtures import small_scenario


class ServiceTestCase(unittest.TestCase):
    def setUp(self):
        self.member = MemberIdentity.generate("m0", random.Random("node member"))
        self.node = NodeCore.create_service(
            "n0",
            AppConfig(),
            random.Random("node"),
            members=[self.member.public_record()],
        )
        self.now = 0.0
        self.requests = 0
        self.node.drain()

    def call(self, endpoint, **args):
        self.now += 1.0
        self.requests += 1
        self.node.client_request("client", self.requests, Request(endpoint, args), self.now)
        _, replies, _ = self.node.drain()
        (reply,) = replies
        return reply.response

    def govern(self, kind, body):
        request = SignedRequest.create(self.member, kind, body)
        return self.call("gov", request=request.to_bytes().decode())

    def open_service(self):
        proposal = Proposal([Action("transition_service_to_open")]).to_dict()
        proposal_id = self.govern(RequestKind.PROPOSAL, proposal).body["proposal_id"]
        ballot = {"proposal_id": proposal_id, "ballot": {"vote": True}}
        return self.govern(RequestKind.BALLOT, ballot)


class TestCreateService(ServiceTestCase):
    def test_genesis(self):
        ledger = self.node.ledger
        self.assertEqual(ledger.last_txid, TransactionId(1, 1))
        self.assertTrue(ledger.entry(1).is_signature)
        self.assertEqual(ledger.commit_seqno, 1)
        self.assertTrue(self.node.is_primary)
        self.assertIs(self.node.service_status(), ServiceStatus.OPENING)
        self.assertIs(self.node.node_status(), NodeStatus.TRUSTED)
        self.assertIsNotNone(self.node.service_identity)

    def test_writes_refused_until_open(self):
        response = self.call("write_message", id=1, msg="early")
        self.assertIs(response.status, ResponseStatus.SERVICE_NOT_OPEN)

    def test_members_open_the_service(self):
        response = self.open_service()
        self.assertTrue(response.ok)
        self.assertEqual(response.body["state"], "Accepted")
        self.assertIs(self.node.service_status(), ServiceStatus.OPEN)

    def test_resume_from_disk_refused(self):
        with self.assertRaises(ConsensusInvariantError):
            NodeCore.resume_from_disk("n0")


class TestClientWrites(ServiceTestCase):
    def setUp(self):
        super().setUp()
        self.open_service()
        self.written = self.call("write_message", id=7, msg="hello")

    def test_write_then_read(self):
        self.assertTrue(self.written.ok)
        self.assertEqual(self.written.txid.seqno, self.node.ledger.last_seqno)
        self.assertEqual(self.call("read_message", id=7).body, "hello")

    def test_status_moves_to_committed(self):
        txid = str(self.written.txid)
        self.assertEqual(self.call("tx", txid=txid).body, "Pending")
        self.node.emit_signature()
        self.assertEqual(self.call("tx", txid=txid).body, "Committed")
        self.assertEqual(self.call("tx", txid="9.1").body, "Invalid")

    def test_receipt_verifies_against_service_identity(self):
        refused = self.call("receipt", txid=str(self.written.txid))
        self.assertFalse(refused.ok)
        self.node.emit_signature()
        response = self.call("receipt", txid=str(self.written.txid))
        receipt = Receipt.from_text(response.body)
        self.assertEqual(receipt.txid, self.written.txid)
        self.assertTrue(verify_receipt(receipt, self.node.service_identity))
        self.assertFalse(verify_receipt(receipt, self.member.signing.public_id))

    def test_bad_txid_argument(self):
        self.assertIs(self.call("tx", txid="seven").status, ResponseStatus.ERROR)


class TestJoining(ServiceTestCase):
    def test_joiner_asks_its_peers(self):
        joiner = NodeCore.join_service("n1", AppConfig(), random.Random("n1"), ["n0"])
        joiner.tick(0.0)
        messages, _, _ = joiner.drain()
        ((to, message),) = messages
        self.assertEqual(to, "n0")
        self.assertIsInstance(message, JoinRequest)
        self.assertTrue(joiner.joining)

    def test_primary_admits_joiner_as_pending(self):
        joiner = NodeCore.join_service("n1", AppConfig(), random.Random("n1"), ["n0"])
        joiner.tick(0.0)
        (_, request), = joiner.drain()[0]
        self.node.receive("n1", request, 1.0)
        messages, _, _ = self.node.drain()
        (response,) = [m for to, m in messages if to == "n1"]
        self.assertTrue(response.accepted)
        joiner.receive("n0", response, 2.0)
        self.assertFalse(joiner.joining)
        self.assertEqual(joiner.service_identity, self.node.service_identity)

    def test_unknown_code_refused(self):
        joiner = NodeCore.join_service(
            "n1", AppConfig(), random.Random("n1"), ["n0"], code_id="untrusted"
        )
        joiner.tick(0.0)
        (_, request), = joiner.drain()[0]
        self.node.receive("n1", request, 1.0)
        messages, _, _ = self.node.drain()
        (response,) = [m for to, m in messages if to == "n1"]
        self.assertFalse(response.accepted)
        self.assertIn("untrusted", response.reason)


def snapshot_scenario():
    return small_scenario(
        name="snapshots",
        duration_ms=2000.0,
        ledger={
            "signature_interval": 10,
            "signature_interval_ms": 50,
            "snapshot_interval": 20,
        },
        faults=[{"at_ms": 1200.0, "kind": "join", "new_node": "n3"}],
        governance=[
            {
                "at_ms": 1200.0,
                "label": "trust-n3",
                "member": "m0",
                "voters": ["m0", "m1"],
                "after_pending": ["n3"],
                "actions": [{"name": "transition_node_to_trusted", "args": {"node_id": "n3"}}],
            }
        ],
    )


class TestSnapshots(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.result = run_scenario(snapshot_scenario())

    def test_joiner_starts_from_a_snapshot(self):
        (joined,) = [e for e in self.result.trace.of_type("joined") if e["node"] == "n3"]
        self.assertGreater(joined["start"], 0)
        joiner = self.result.nodes["n3"]
        self.assertEqual(joiner.ledger.start.seqno, joined["start"])
        self.assertIs(joiner.node_status(), NodeStatus.TRUSTED)

    def test_joiner_state_matches_primary(self):
        primary = self.result.nodes["n0"]
        joiner = self.result.nodes["n3"]
        upto = min(primary.ledger.commit_seqno, joiner.ledger.commit_seqno)
        self.assertGreater(upto, joiner.ledger.start.seqno)
        self.assertEqual(primary.ledger.root_at(upto), joiner.ledger.root_at(upto))

    def test_every_node_finalized_a_snapshot(self):
        for node_id in ("n0", "n1", "n2"):
            self.assertIsNotNone(self.result.nodes[node_id].latest_snapshot(), node_id)


if __name__ == "__main__":
    unittest.main()
