"""
Progress display for batches of simulation runs.
"""

from typing import Iterable, Optional, TypeVar

from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)
from tqdm import tqdm

from consortium_ledger.project_logging import console

T = TypeVar("T")


def run_progress() -> Progress:
    """Rich progress display with a completed/total run counter."""
    return Progress(
        SpinnerColumn(),
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        TimeRemainingColumn(),
        console=console,
    )


def track_runs(
    iterable: Iterable[T],
    description: str = "Simulating",
    total: Optional[int] = None,
    use_rich: bool = True,
    enabled: bool = True,
) -> Iterable[T]:
    """
    Yield items of iterable while advancing a progress bar.

    Args:
        iterable: Completed runs, typically from as_completed()
        description: Label shown next to the bar
        total: Number of runs expected, when iterable has no length
        use_rich: Use a rich progress bar instead of tqdm
        enabled: Show nothing when False
    """
    if total is None and hasattr(iterable, "__len__"):
        total = len(iterable)
    if not enabled:
        yield from iterable
    elif use_rich:
        with run_progress() as progress:
            task_id = progress.add_task(description, total=total)
            for item in iterable:
                yield item
                progress.update(task_id, advance=1)
    else:
        yield from tqdm(iterable, desc=description, total=total, unit="runs")
