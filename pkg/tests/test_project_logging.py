"""
Tests for logging setup and simulated-time stamps.
"""

import logging
import tempfile
import unittest
from pathlib import Path

from consortium_ledger.project_logging import (
    SimulatedTimeFilter,
    get_log_level,
    get_logger,
    set_simulated_time,
    setup_logging,
)
from consortium_ledger.sim import run_scenario
from tests.fixtures import small_scenario


class ListHandler(logging.Handler):
    def __init__(self):
        super().__init__(logging.DEBUG)
        self.records = []
        self.addFilter(SimulatedTimeFilter())

    def emit(self, record):
        self.records.append(record)


class TestSetupLogging(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        root = logging.getLogger()
        saved_handlers, saved_level = root.handlers[:], root.level

        def restore():
            for handler in root.handlers[:]:
                root.removeHandler(handler)
                if handler not in saved_handlers:
                    handler.close()
            for handler in saved_handlers:
                root.addHandler(handler)
            root.setLevel(saved_level)
            set_simulated_time(None)

        self.addCleanup(restore)

    def test_file_records_carry_simulated_time(self):
        log_file = Path(self.tmp.name) / "logs" / "run.log"
        setup_logging(log_file=log_file, log_level="info")
        log = get_logger("sim.test")

        log.info("outside")
        set_simulated_time(512.3)
        log.info("inside")
        set_simulated_time(None)
        for handler in logging.getLogger().handlers:
            handler.flush()

        lines = log_file.read_text(encoding="utf-8").splitlines()
        self.assertIn(" - - consortium_ledger.sim.test - INFO - outside", lines[0])
        self.assertIn(" - t=512.3ms - consortium_ledger.sim.test - INFO - inside", lines[1])

    def test_verbose_overrides_level(self):
        setup_logging(log_level="ERROR", verbose=True)
        self.assertEqual(logging.getLogger().level, logging.DEBUG)

    def test_log_levels(self):
        self.assertEqual(get_log_level("warning"), logging.WARNING)
        self.assertEqual(get_log_level(logging.ERROR), logging.ERROR)
        with self.assertRaises(ValueError):
            get_log_level("LOUD")


class TestSimulatorStamps(unittest.TestCase):
    def test_fault_records_are_stamped_with_event_time(self):
        handler = ListHandler()
        sim_logger = logging.getLogger("consortium_ledger.sim")
        saved = sim_logger.level
        sim_logger.setLevel(logging.INFO)
        sim_logger.addHandler(handler)
        self.addCleanup(sim_logger.removeHandler, handler)
        self.addCleanup(sim_logger.setLevel, saved)

        run_scenario(
            small_scenario(
                duration_ms=400.0,
                faults=[{"at_ms": 300.0, "kind": "crash", "node": "n2"}],
            )
        )

        crashed = [r for r in handler.records if "crashed" in r.getMessage()]
        self.assertEqual(len(crashed), 1)
        self.assertEqual(crashed[0].sim_time, "t=300.0ms")
        started = [r for r in handler.records if r.getMessage().startswith("Running")]
        self.assertEqual(started[0].sim_time, "-")


if __name__ == "__main__":
    unittest.main()
