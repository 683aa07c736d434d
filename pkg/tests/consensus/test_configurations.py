"""
Tests for overlapping configurations during reconfiguration.
"""

import unittest

from consortium_ledger.consensus import ActiveConfigurations, Configuration


class TestConfiguration(unittest.TestCase):
    def test_strict_majority(self):
        config = Configuration(1, frozenset({"a", "b", "c", "d"}))
        self.assertFalse(config.has_quorum({"a", "b"}))
        self.assertTrue(config.has_quorum({"a", "b", "c"}))
        # acks from outside the configuration do not count
        self.assertFalse(config.has_quorum({"a", "x", "y"}))

    def test_empty_configuration_has_no_quorum(self):
        self.assertFalse(Configuration(1, frozenset()).has_quorum({"a"}))


class TestActiveConfigurations(unittest.TestCase):
    def setUp(self):
        self.active = ActiveConfigurations([Configuration(1, frozenset({"a", "b", "c"}))])
        self.active.add(5, frozenset({"a", "b", "d"}))

    def test_quorum_needed_in_every_configuration(self):
        self.assertFalse(self.active.is_stable)
        self.assertTrue(self.active.has_quorum({"a", "b"}))
        self.assertFalse(self.active.has_quorum({"a", "c"}))
        self.assertFalse(self.active.has_quorum({"a", "d"}))
        self.assertTrue(self.active.has_quorum({"a", "c", "d"}))

    def test_membership_views(self):
        self.assertEqual(self.active.current, frozenset({"a", "b", "d"}))
        self.assertEqual(self.active.all_nodes, frozenset({"a", "b", "c", "d"}))
        self.assertTrue(self.active.contains("c"))
        self.assertEqual(self.active.first_containing("d").seqno, 5)
        self.assertIsNone(self.active.first_containing("z"))

    def test_commit_retires_older_configurations(self):
        self.assertEqual(self.active.commit(4), [Configuration(1, frozenset({"a", "b", "c"}))])
        self.assertEqual(len(self.active), 2)
        newly = self.active.commit(5)
        self.assertEqual([c.seqno for c in newly], [5])
        self.assertTrue(self.active.is_stable)
        self.assertTrue(self.active.has_quorum({"a", "d"}))
        self.assertFalse(self.active.contains("c"))
        self.assertEqual(self.active.commit(9), [])

    def test_rollback_drops_uncommitted_configuration(self):
        self.active.rollback(4)
        self.assertEqual(self.active.to_list(), [[1, ["a", "b", "c"]]])

    def test_configurations_only_move_forward(self):
        with self.assertRaises(ValueError):
            self.active.add(5, frozenset({"a"}))

    def test_empty(self):
        empty = ActiveConfigurations()
        self.assertFalse(empty.has_quorum({"a"}))
        self.assertEqual(empty.current, frozenset())


if __name__ == "__main__":
    unittest.main()
