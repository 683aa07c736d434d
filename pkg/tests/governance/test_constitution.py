"""
Tests for constitutions and ballots.
"""

import itertools
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from consortium_ledger.common.exceptions import GovernanceError, ValidationError
from consortium_ledger.common.txid import TransactionId
from consortium_ledger.governance import (
    Action,
    Ballot,
    ConstitutionFactory,
    MajorityConstitution,
    OperatorConstitution,
    PerActionConstitution,
    Proposal,
    ProposalState,
    WeightedConstitution,
)
from consortium_ledger.kv import StoreState, Tx
from consortium_ledger.kv.maps import MEMBERS_CERTS

PROPOSAL = Proposal([Action("set_user", {"user_id": "u0", "public_id": "00"})])


def members_store(count: int) -> StoreState:
    store = StoreState()
    tx = Tx(store, privileged=True)
    for i in range(count):
        tx.put(MEMBERS_CERTS, f"m{i}".encode(), bytes([i]) * 32)
    store.apply(TransactionId(1, 1), tx.write_set)
    return store


def majority_oracle(votes, count):
    """Brute-force count of the default rule."""
    in_favour = sum(1 for v in votes if v is True)
    against = sum(1 for v in votes if v is False)
    if in_favour > count // 2:
        return ProposalState.ACCEPTED
    if count - against <= count // 2:
        return ProposalState.REJECTED
    return ProposalState.OPEN


class TestMajority(unittest.TestCase):
    def test_every_vote_combination(self):
        """Accepted exactly when a strict majority votes for, for 1 to 9 members."""
        constitution = MajorityConstitution()
        for count in range(1, 10):
            store = members_store(count)
            ids = [f"m{i}" for i in range(count)]
            # True: for, False: against, None: no ballot
            for combo in itertools.product((True, False, None), repeat=count):
                votes = {m: v for m, v in zip(ids, combo) if v is not None}
                state = constitution.resolve(PROPOSAL, "m0", votes, store)
                self.assertEqual(state, majority_oracle(combo, count), (count, combo))

    def test_votes_of_non_members_ignored(self):
        store = members_store(3)
        votes = {"m0": True, "x1": True, "x2": True}
        self.assertEqual(MajorityConstitution().resolve(PROPOSAL, "m0", votes, store), ProposalState.OPEN)


class TestOtherConstitutions(unittest.TestCase):
    def setUp(self):
        self.store = members_store(4)

    def test_weighted(self):
        constitution = WeightedConstitution({"m0": 3}, veto=["m3"])
        # total weight 6: m0 alone holds 3, not more than half
        self.assertEqual(constitution.resolve(PROPOSAL, "m0", {"m0": True}, self.store), ProposalState.OPEN)
        self.assertEqual(
            constitution.resolve(PROPOSAL, "m0", {"m0": True, "m1": True}, self.store),
            ProposalState.ACCEPTED,
        )
        self.assertEqual(
            constitution.resolve(PROPOSAL, "m0", {"m0": True, "m1": True, "m3": False}, self.store),
            ProposalState.REJECTED,
        )
        self.assertEqual(
            constitution.resolve(PROPOSAL, "m0", {"m0": False}, self.store),
            ProposalState.REJECTED,
        )
        with self.assertRaises(GovernanceError):
            WeightedConstitution({"m0": -1})

    def test_per_action_takes_strictest(self):
        constitution = PerActionConstitution({"set_constitution": 1.0}, default=0.5)
        strict = Proposal([Action("set_user"), Action("set_constitution")])
        three = {"m0": True, "m1": True, "m2": True}
        self.assertEqual(constitution.required_fraction(strict), 1.0)
        self.assertEqual(constitution.resolve(PROPOSAL, "m0", three, self.store), ProposalState.ACCEPTED)
        self.assertEqual(constitution.resolve(strict, "m0", three, self.store), ProposalState.OPEN)
        self.assertEqual(
            constitution.resolve(strict, "m0", {**three, "m3": True}, self.store),
            ProposalState.ACCEPTED,
        )
        self.assertEqual(constitution.resolve(strict, "m0", {"m3": False}, self.store), ProposalState.REJECTED)
        with self.assertRaises(GovernanceError):
            PerActionConstitution(default=1.5)

    def test_operator_may_manage_nodes_alone(self):
        constitution = OperatorConstitution("m0")
        nodes = Proposal([Action("transition_node_to_trusted", {"node_id": "n3"})])
        self.assertEqual(constitution.resolve(nodes, "m0", {}, self.store), ProposalState.ACCEPTED)
        self.assertEqual(constitution.resolve(nodes, "m1", {}, self.store), ProposalState.OPEN)
        self.assertEqual(constitution.resolve(PROPOSAL, "m0", {}, self.store), ProposalState.OPEN)

    def test_factory(self):
        factory = ConstitutionFactory()
        for doc in (
            {"name": "majority"},
            {"name": "weighted", "weights": {"m0": 2}, "veto": ["m1"]},
            {"name": "per_action", "thresholds": {"set_app": 0.75}},
            {"name": "operator", "operator": "m0"},
        ):
            constitution = factory.create(doc)
            self.assertEqual(constitution.name, doc["name"])
            self.assertEqual(factory.create(constitution.to_dict()).to_dict(), constitution.to_dict())
        for bad in ({"name": "anarchy"}, {"name": "operator"}, "majority", {"name": "per_action", "default": "x"}):
            with self.assertRaises(GovernanceError):
                factory.create(bad)


class TestBallots(unittest.TestCase):
    def test_unconditional(self):
        self.assertTrue(Ballot.from_dict({"vote": True}).evaluate(PROPOSAL, StoreState()))
        self.assertFalse(Ballot.from_dict({"vote": False}).evaluate(PROPOSAL, StoreState()))

    def test_action_condition(self):
        ballot = Ballot.from_dict({"vote": True, "if_proposal_has_action": "set_app"})
        self.assertIsNone(ballot.evaluate(PROPOSAL, StoreState()))
        self.assertTrue(ballot.evaluate(Proposal([Action("set_app")]), StoreState()))

    def test_key_condition(self):
        store = members_store(1)
        condition = {"map": MEMBERS_CERTS, "key": "m0", "value": "\x00" * 32}
        ballot = Ballot.from_dict({"vote": True, "if_key_equals": condition})
        self.assertTrue(ballot.evaluate(PROPOSAL, store))
        other = Ballot.from_dict({"vote": True, "if_key_equals": {**condition, "key": "m9"}})
        self.assertIsNone(other.evaluate(PROPOSAL, store))

    @settings(max_examples=40, deadline=None)
    @given(st.dictionaries(st.text(max_size=8), st.integers() | st.text(max_size=4), max_size=3))
    def test_malformed_ballots_rejected(self, doc):
        with self.assertRaises(ValidationError):
            Ballot.from_dict(doc)

    def test_document_survives(self):
        doc = {"vote": False, "if_proposal_has_action": "remove_node"}
        self.assertEqual(Ballot.from_dict(doc).to_dict(), doc)
        for bad in ({"vote": "yes"}, {"vote": True, "extra": 1}, {"vote": True, "if_key_equals": {"map": "m"}}):
            with self.assertRaises(ValidationError):
                Ballot.from_dict(bad)


if __name__ == "__main__":
    unittest.main()
