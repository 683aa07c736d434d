"""
Tests for the offline audit, including byte-level tamper detection.
"""

import random
import tempfile
import unittest
from pathlib import Path

from consortium_ledger.crypto import KeyPair
from consortium_ledger.ledger import audit, audit_chunks
from consortium_ledger.ledger.audit import Severity
from consortium_ledger.ledger.chunks import parse_chunk, render_chunks
from tests.fixtures import parsed_chunks, small_run

MUTATIONS = 1000


class TestAudit(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        result = small_run()
        cls.files = result.ledger_files["n0"]
        cls.service_id = bytes.fromhex(result.service_identities()["n0"])

    def test_completed_run_verifies(self):
        report = audit_chunks(parsed_chunks(self.files), self.service_id)
        self.assertTrue(report.ok, report.first_violation)
        self.assertGreater(len(report.signatures), 1)
        self.assertEqual(report.service_identities, [self.service_id.hex()])
        self.assertIn("Accepted", report.proposals.values())
        self.assertTrue(report.governance)
        self.assertTrue(all(record.signature_valid for record in report.governance))
        self.assertGreater(report.last_verified_seqno, 0)

    def test_audit_from_directory(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            for name, data in self.files:
                (Path(temp_dir) / name).write_bytes(data)
            report = audit(temp_dir, self.service_id)
        self.assertTrue(report.ok)
        self.assertEqual(report.files, len(self.files))
        doc = report.to_dict()
        self.assertTrue(doc["ok"])
        self.assertIn("findings", doc)

    def test_unsigned_tail_is_informational(self):
        ledger = small_run().nodes["n0"].ledger
        signed = ledger.signature_seqnos[-2]
        files = render_chunks(ledger.entries(1, signed + 1), signed)
        report = audit_chunks(parsed_chunks(files), self.service_id)
        self.assertTrue(report.ok, report.first_violation)
        (finding,) = report.findings
        self.assertIs(finding.severity, Severity.INFO)
        self.assertEqual(finding.seqno, signed + 1)
        self.assertEqual(report.last_verified_seqno, signed)

    def test_other_service_identity_rejected(self):
        stranger = KeyPair.generate(random.Random("stranger")).public_id
        report = audit_chunks(parsed_chunks(self.files), stranger)
        self.assertFalse(report.ok)

    def test_no_files(self):
        report = audit_chunks([], self.service_id)
        self.assertFalse(report.ok)

    def test_missing_chunk_detected(self):
        files = [f for i, f in enumerate(self.files) if i != 1]
        report = audit_chunks(parsed_chunks(files), self.service_id)
        self.assertFalse(report.ok)
        first_of_missing = parse_chunk(Path(self.files[1][0]), self.files[1][1]).first_seqno
        self.assertEqual(report.first_violation.seqno, first_of_missing)

    def test_header_damage_detected(self):
        files = list(self.files)
        name, data = files[0]
        files[0] = (name, b"X" + data[1:])
        report = audit_chunks(parsed_chunks(files), self.service_id)
        self.assertFalse(report.ok)
        self.assertEqual(report.first_violation.seqno, 1)

    def test_every_single_byte_mutation_is_located(self):
        """Flip one byte inside some entry; the audit must fail at or before it."""
        frames = []
        for file_index, (name, data) in enumerate(self.files):
            chunk = parse_chunk(Path(name), data)
            offsets = [frame.offset for frame in chunk.frames] + [len(data)]
            for frame, end in zip(chunk.frames, offsets[1:]):
                frames.append((file_index, frame.offset, end, frame.entry.txid.seqno))

        rng = random.Random("tamper")
        for _ in range(MUTATIONS):
            file_index, start, end, seqno = rng.choice(frames)
            position = rng.randrange(start, end)
            mask = rng.randrange(1, 256)
            files = list(self.files)
            name, data = files[file_index]
            files[file_index] = (
                name,
                data[:position] + bytes([data[position] ^ mask]) + data[position + 1 :],
            )
            report = audit_chunks(parsed_chunks(files), self.service_id)
            violation = report.first_violation
            self.assertIsNotNone(violation, f"missed flip at {name}:{position}")
            self.assertEqual(violation.severity, Severity.ERROR)
            self.assertLessEqual(violation.seqno, seqno, f"{name}:{position}")


if __name__ == "__main__":
    unittest.main()
