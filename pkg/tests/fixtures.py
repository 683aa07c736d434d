"""
Shared builders for tests: hand-made ledgers and small simulated services.
"""

import functools
import random
from pathlib import Path
from typing import List, Optional

from consortium_ledger.common.txid import TransactionId
from consortium_ledger.crypto import KeyPair, SymmetricSecret
from consortium_ledger.kv import WriteSet
from consortium_ledger.ledger import EntryKind, Ledger, build_entry, make_signature_entry
from consortium_ledger.ledger.chunks import parse_chunk
from consortium_ledger.sim import Scenario, run_scenario


def user_write_set(seqno: int) -> WriteSet:
    ws = WriteSet()
    ws.put("app.msgs", str(seqno).encode(), f"private {seqno}".encode())
    ws.put("public:app.msgs", str(seqno).encode(), f"public {seqno}".encode())
    return ws


def build_ledger(
    pattern: str,
    secret: Optional[SymmetricSecret] = None,
    key: Optional[KeyPair] = None,
    view: int = 1,
) -> Ledger:
    """
    Ledger from a pattern such as "UUSUS": U is a user write, S a signature.
    """
    secret = secret or SymmetricSecret.generate(random.Random("ledger secret"))
    key = key or KeyPair.generate(random.Random("node key"))
    ledger = Ledger()
    for seqno, kind in enumerate(pattern, start=1):
        txid = TransactionId(view, seqno)
        if kind == "S":
            entry, _ = make_signature_entry(txid, ledger.tree, key, "n0", [(view, 1)])
        else:
            entry = build_entry(txid, EntryKind.USER, user_write_set(seqno), secret)
        ledger.append(entry)
    return ledger


def small_scenario(**overrides) -> Scenario:
    """Three nodes, three members and one closed-loop writer."""
    doc = {
        "name": "small",
        "seed": 7,
        "nodes": 3,
        "members": 3,
        "duration_ms": 1500.0,
        "ledger": {"signature_interval": 10, "signature_interval_ms": 50},
        "clients": [{"name": "writer", "think_ms": 5.0, "read_ratio": 0.2}],
    }
    doc.update(overrides)
    return Scenario(**doc)


@functools.lru_cache(maxsize=None)
def small_run(seed: int = 7):
    """Result of running small_scenario once per seed; treat it as read-only."""
    return run_scenario(small_scenario(seed=seed))


def parsed_chunks(files) -> List:
    return [parse_chunk(Path(name), data) for name, data in files]
