"""
Tests for the helpers behind the command handlers.
"""

import tempfile
import unittest
from pathlib import Path

from consortium_ledger.cli_handlers import (
    VerifyReceiptCommandHandler,
    parse_param,
    read_actions,
    read_service_id,
    tradeoff_holds,
)
from consortium_ledger.common.exceptions import ConfigurationError, ValidationError
from consortium_ledger.result import ErrorType, OperationError, Result


def line(value, throughput, commit_ms):
    return {
        "value": value,
        "writes_per_work_s": throughput,
        "median_time_to_commit_ms": commit_ms,
    }


class TestParseParam(unittest.TestCase):
    def test_name_and_values(self):
        self.assertEqual(
            parse_param("signature_interval=1,10,100,1000"),
            ("signature_interval", [1, 10, 100, 1000]),
        )
        self.assertEqual(parse_param(" consensus.heartbeat_ms = 20 "), ("consensus.heartbeat_ms", [20]))

    def test_rejects_missing_parts(self):
        for text in ("signature_interval", "=1,2", "signature_interval="):
            with self.assertRaises(ConfigurationError, msg=text):
                parse_param(text)


class TestTradeoff(unittest.TestCase):
    def test_holds_in_value_order(self):
        summary = [line(100, 900.0, 60.0), line(1, 300.0, 5.0), line(10, 700.0, 20.0)]
        self.assertEqual(
            tradeoff_holds(summary), {"throughput_rises": True, "commit_latency_rises": True}
        )

    def test_broken_trend(self):
        summary = [line(1, 300.0, 50.0), line(10, 200.0, 20.0)]
        self.assertEqual(
            tradeoff_holds(summary), {"throughput_rises": False, "commit_latency_rises": False}
        )

    def test_missing_measurement(self):
        summary = [line(1, 300.0, 5.0), line(1000, 900.0, None)]
        self.assertFalse(tradeoff_holds(summary)["commit_latency_rises"])


class TestFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_actions_file_forms(self):
        (self.dir / "list.yaml").write_text("- name: remove_node\n  args: {node_id: n1}\n")
        (self.dir / "doc.toml").write_text('[[actions]]\nname = "transition_service_to_open"\n')
        self.assertEqual(
            read_actions(self.dir / "list.yaml"),
            [{"name": "remove_node", "args": {"node_id": "n1"}}],
        )
        self.assertEqual(
            read_actions(self.dir / "doc.toml"),
            [{"name": "transition_service_to_open", "args": {}}],
        )

    def test_empty_actions(self):
        (self.dir / "empty.json").write_text('{"actions": []}')
        with self.assertRaises(ConfigurationError):
            read_actions(self.dir / "empty.json")

    def test_service_id(self):
        (self.dir / "service_id").write_text("00ff\n")
        self.assertEqual(read_service_id(self.dir / "service_id"), b"\x00\xff")
        with self.assertRaises(ValidationError):
            read_service_id(self.dir / "absent")


class TestHandleResult(unittest.TestCase):
    def setUp(self):
        self.handler = VerifyReceiptCommandHandler("r.json", "service_id", output_format="json")

    def test_failed_check_keeps_its_exit_code(self):
        stats = self.handler.handle_result(Result.success({"success": False, "exit_code": 10}))
        self.assertEqual(stats["exit_code"], 10)

    def test_success_defaults(self):
        stats = self.handler.handle_result(Result.success({"txid": "2.5"}))
        self.assertTrue(stats["success"])
        self.assertEqual(stats["exit_code"], 0)

    def test_error_exit_code_from_details(self):
        error = OperationError(ErrorType.INVALID_ARGUMENT, "bad", details={"exit_code": 7})
        stats = self.handler.handle_result(Result.failure([error]))
        self.assertFalse(stats["success"])
        self.assertEqual(stats["exit_code"], 7)

    def test_error_without_exit_code(self):
        stats = self.handler.handle_result(
            Result.failure([OperationError(ErrorType.UNKNOWN, "boom")])
        )
        self.assertEqual(stats["exit_code"], 1)


if __name__ == "__main__":
    unittest.main()
