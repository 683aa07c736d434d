"""
Tests for scenario models and loading.
"""

import json
import tempfile
import unittest
from pathlib import Path

import yaml

from consortium_ledger.common.exceptions import ConfigurationError
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.sim import GovernanceStep, Scenario, load_scenario

SCENARIO = {
    "name": "loaded",
    "seed": 3,
    "nodes": 5,
    "members": 2,
    "ledger": {"signature_interval": 25},
    "clients": [{"name": "reader", "read_ratio": 0.9}],
    "faults": [{"at_ms": 100.0, "kind": "crash", "node": "primary"}],
}

TOML_SCENARIO = """
name = "from-toml"
nodes = 1

[consensus]
heartbeat_ms = 20
"""


class TestScenarioModel(unittest.TestCase):
    def test_defaults(self):
        scenario = Scenario()
        self.assertEqual(scenario.node_ids, ["n0", "n1", "n2"])
        self.assertEqual(scenario.member_ids, ["m0", "m1", "m2"])
        self.assertTrue(scenario.auto_open)

    def test_counts_must_be_positive(self):
        with self.assertRaises(ValueError):
            Scenario(nodes=0)
        with self.assertRaises(ValueError):
            Scenario(members=0)

    def test_unknown_fields_rejected(self):
        with self.assertRaises(ValueError):
            Scenario(node_count=3)

    def test_read_ratio_range(self):
        with self.assertRaises(ValueError):
            Scenario(clients=[{"name": "c", "read_ratio": 1.5}])

    def test_governance_step_needs_a_source(self):
        with self.assertRaises(ValueError):
            GovernanceStep(at_ms=1.0, label="empty")
        step = GovernanceStep(at_ms=1.0, label="files", request_files=["p.json"])
        self.assertEqual(step.request_files, [Path("p.json")])

    def test_app_config_applies_overrides(self):
        base = AppConfig()
        config = Scenario(**SCENARIO).app_config(base)
        self.assertEqual(config.ledger.signature_interval, 25)
        self.assertEqual(config.ledger.signature_interval_ms, base.ledger.signature_interval_ms)
        self.assertEqual(config.consensus, base.consensus)

    def test_invalid_override_rejected(self):
        with self.assertRaises(ValueError):
            Scenario(ledger={"signature_interval": 0}).app_config()


class TestWithParam(unittest.TestCase):
    def setUp(self):
        self.scenario = Scenario(**SCENARIO)

    def test_bare_name_finds_its_section(self):
        changed = self.scenario.with_param("signature_interval", 1000)
        self.assertEqual(changed.ledger, {"signature_interval": 1000})
        changed = self.scenario.with_param("drop_rate", 0.1)
        self.assertEqual(changed.simulation, {"drop_rate": 0.1})
        self.assertEqual(self.scenario.simulation, {})

    def test_dotted_name(self):
        changed = self.scenario.with_param("consensus.heartbeat_ms", 20)
        self.assertEqual(changed.app_config().consensus.heartbeat_ms, 20)

    def test_scenario_field(self):
        self.assertEqual(self.scenario.with_param("nodes", 7).nodes, 7)

    def test_unknown_name(self):
        with self.assertRaises(ConfigurationError):
            self.scenario.with_param("no_such_knob", 1)


class TestLoadScenario(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_yaml_and_json_agree(self):
        (self.dir / "s.yaml").write_text(yaml.safe_dump(SCENARIO))
        (self.dir / "s.json").write_text(json.dumps(SCENARIO))
        from_yaml = load_scenario(self.dir / "s.yaml")
        self.assertEqual(from_yaml, load_scenario(self.dir / "s.json"))
        self.assertEqual(from_yaml.faults[0].node, "primary")

    def test_toml(self):
        (self.dir / "s.toml").write_text(TOML_SCENARIO)
        scenario = load_scenario(self.dir / "s.toml")
        self.assertEqual(scenario.name, "from-toml")
        self.assertEqual(scenario.app_config().consensus.heartbeat_ms, 20)

    def test_request_files_resolve_against_scenario_directory(self):
        doc = {
            "name": "files",
            "governance": [{"at_ms": 10.0, "label": "g", "request_files": ["req/p.json"]}],
        }
        (self.dir / "s.yaml").write_text(yaml.safe_dump(doc))
        step = load_scenario(self.dir / "s.yaml").governance[0]
        self.assertEqual(step.request_files, [(self.dir / "req" / "p.json").resolve()])

    def test_invalid_scenario(self):
        (self.dir / "s.yaml").write_text(yaml.safe_dump({"nodes": -1}))
        with self.assertRaises(ConfigurationError):
            load_scenario(self.dir / "s.yaml")

    def test_unsupported_format(self):
        (self.dir / "s.ini").write_text("[x]")
        with self.assertRaises(ConfigurationError):
            load_scenario(self.dir / "s.ini")

    def test_missing_file(self):
        with self.assertRaises(ConfigurationError):
            load_scenario(self.dir / "absent.yaml")


if __name__ == "__main__":
    unittest.main()
