from consortium_ledger.visualize.progress import run_progress, track_runs

__all__ = ["run_progress", "track_runs"]
