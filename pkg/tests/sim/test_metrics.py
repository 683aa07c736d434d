"""
Tests for run metrics.
"""

import unittest

from consortium_ledger.sim.metrics import MetricsRecorder, WriteRecord


def committed(sent_at: float, txid: str, final_at: float) -> WriteRecord:
    return WriteRecord(
        "c0",
        sent_at,
        ok=True,
        responded_at=sent_at + 1.0,
        txid=txid,
        final_status="Committed",
        final_at=final_at,
    )


class TestCommitTimes(unittest.TestCase):
    def setUp(self):
        self.recorder = MetricsRecorder()
        for at, view, seqno in ((10.0, 2, 3), (40.0, 2, 8), (90.0, 4, 9)):
            self.recorder.record_commit(at, view, seqno)

    def test_taken_from_the_primary_not_the_client(self):
        write = committed(12.0, "2.5", final_at=300.0)
        self.assertEqual(self.recorder.commit_time(write), 40.0)

    def test_commit_in_an_older_view_does_not_count(self):
        write = committed(30.0, "4.6", final_at=300.0)
        self.assertEqual(self.recorder.commit_time(write), 90.0)

    def test_falls_back_to_the_client(self):
        self.assertEqual(self.recorder.commit_time(committed(50.0, "4.20", 120.0)), 120.0)
        pending = WriteRecord("c0", 0.0, ok=True, txid="2.1")
        self.assertIsNone(self.recorder.commit_time(pending))

    def test_summary_reports_median(self):
        self.recorder.writes = [
            committed(0.0, "2.1", 500.0),
            committed(5.0, "2.4", 500.0),
            committed(20.0, "2.7", 500.0),
        ]
        metrics = self.recorder.summary(1000.0)
        self.assertEqual(metrics.writes_committed, 3)
        self.assertEqual(metrics.median_time_to_commit_ms, 20.0)
        self.assertAlmostEqual(metrics.mean_time_to_commit_ms, 65.0 / 3)
        rows = self.recorder.intervals(1000.0)
        self.assertEqual(rows[0]["commits"], 3)


if __name__ == "__main__":
    unittest.main()
