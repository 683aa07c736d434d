"""
Tests for configuration loading and precedence.
"""

import importlib
import json
import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import yaml

from consortium_ledger.common.exceptions import ConfigurationError
from consortium_ledger.config.config_manager import ConfigManager
from consortium_ledger.config.config_models import AppConfig

# the package re-exports an instance under the module name
config_module = importlib.import_module("consortium_ledger.config.config_manager")


class ConfigTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.manager = ConfigManager()
        patcher = mock.patch.object(config_module, "DEFAULT_CONFIG_PATHS", [])
        patcher.start()
        self.addCleanup(patcher.stop)
        env = mock.patch.dict(
            os.environ,
            {k: v for k, v in os.environ.items() if not k.startswith("CONSORTIUM_LEDGER_")},
            clear=True,
        )
        env.start()
        self.addCleanup(env.stop)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, doc):
        path = self.dir / name
        path.write_text(yaml.safe_dump(doc) if name.endswith(".yaml") else json.dumps(doc))
        return str(path)


class TestPrecedence(ConfigTestCase):
    def test_defaults(self):
        config = self.manager.load_configuration()
        self.assertEqual(config, AppConfig())
        self.assertEqual(config.ledger.signature_interval, 100)
        self.assertIsNone(config.ledger.snapshot_interval)

    def test_file_overrides_defaults(self):
        path = self.write("c.yaml", {"ledger": {"signature_interval": 10}})
        config = self.manager.load_configuration(config_file=path)
        self.assertEqual(config.ledger.signature_interval, 10)
        self.assertEqual(config.ledger.signature_interval_ms, 100)

    def test_environment_overrides_file(self):
        path = self.write("c.json", {"ledger": {"signature_interval": 10}, "sweep": {"seeds": 2}})
        with mock.patch.dict(
            os.environ,
            {
                "CONSORTIUM_LEDGER_LEDGER__SIGNATURE_INTERVAL": "1000",
                "CONSORTIUM_LEDGER_LEDGER__SIGNATURE_INTERVAL_MS": "none",
                "CONSORTIUM_LEDGER_FULL_SWEEP": "1",
            },
        ):
            config = self.manager.load_configuration(config_file=path)
        self.assertEqual(config.ledger.signature_interval, 1000)
        self.assertIsNone(config.ledger.signature_interval_ms)
        self.assertEqual(config.sweep.seeds, 2)

    def test_cli_overrides_environment(self):
        with mock.patch.dict(os.environ, {"CONSORTIUM_LEDGER_LOGGING__LOG_LEVEL": "ERROR"}):
            config = self.manager.load_configuration(
                cli_args={"log_level": "debug", "verbose": False, "workers": 3}
            )
        self.assertEqual(config.logging.log_level, "DEBUG")
        self.assertFalse(config.logging.verbose)
        self.assertEqual(config.sweep.workers, 3)

    def test_unset_flags_keep_file_values(self):
        path = self.write("c.yaml", {"logging": {"verbose": True}, "ui": {"progress_bars": True}})
        config = self.manager.load_configuration(
            config_file=path, cli_args={"verbose": False, "no_progress": False}
        )
        self.assertTrue(config.logging.verbose)
        self.assertTrue(config.ui.progress_bars)

    def test_no_progress_flag(self):
        config = self.manager.load_configuration(cli_args={"no_progress": True})
        self.assertFalse(config.ui.progress_bars)

    def test_config_property_loads_lazily(self):
        self.assertEqual(self.manager.config, AppConfig())


class TestErrors(ConfigTestCase):
    def test_missing_file(self):
        with self.assertRaises(ConfigurationError):
            self.manager.load_configuration(config_file=str(self.dir / "absent.yaml"))

    def test_invalid_values(self):
        path = self.write("c.yaml", {"simulation": {"drop_rate": 1.5}})
        with self.assertRaises(ConfigurationError):
            self.manager.load_configuration(config_file=path)

    def test_inverted_election_timeout(self):
        path = self.write("c.yaml", {"consensus": {"election_timeout_ms": [300, 150]}})
        with self.assertRaises(ConfigurationError):
            self.manager.load_configuration(config_file=path)

    def test_unreadable_yaml(self):
        path = self.dir / "c.yaml"
        path.write_text("ledger: [unclosed")
        with self.assertRaises(ConfigurationError):
            self.manager.load_configuration(config_file=str(path))


class TestTemplate(ConfigTestCase):
    def test_yaml_template_loads_back_to_defaults(self):
        path = self.dir / "template.yaml"
        path.write_text(self.manager.generate_template("yaml"))
        self.assertEqual(self.manager.load_configuration(config_file=str(path)), AppConfig())

    def test_json_template(self):
        doc = json.loads(self.manager.generate_template("json"))
        self.assertEqual(doc["ledger"]["signature_interval"], 100)
        self.assertEqual(doc["consensus"]["election_timeout_ms"], [150, 300])

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            self.manager.generate_template("ini")


class TestModels(unittest.TestCase):
    def test_liveness_window_defaults_to_twice_the_timeout(self):
        config = AppConfig()
        self.assertEqual(config.consensus.effective_liveness_window_ms, 600)

    def test_validated_assignment(self):
        config = AppConfig()
        with self.assertRaises(ValueError):
            config.logging = {"log_level": "LOUD"}


if __name__ == "__main__":
    unittest.main()
