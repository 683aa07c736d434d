"""
Consortium ledger: signature-anchored replication, Merkle receipts,
member governance and disaster recovery, run inside a deterministic
simulator.
"""

from consortium_ledger.project_logging import logger

__version__ = "0.1.0"

__all__ = ["__version__", "logger"]
