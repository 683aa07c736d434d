"""
Logging setup for the command line and the simulator.

Records emitted while a simulation runs are stamped with the simulated time
of the event being processed, so a log can be lined up with trace.jsonl.
The stamp is informational only: nothing in the protocol code reads it.
"""

import logging
from contextvars import ContextVar
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional, Union

from rich.console import Console
from rich.logging import RichHandler

# Results and tables go to stdout; log records go to stderr
console = Console()

logger = logging.getLogger("consortium_ledger")
logger.addHandler(logging.NullHandler())

LOG_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}

_simulated_ms: ContextVar[Optional[float]] = ContextVar("simulated_ms", default=None)


def set_simulated_time(now_ms: Optional[float]) -> None:
    """Set the simulated time stamped on records; None outside a run."""
    _simulated_ms.set(now_ms)


class SimulatedTimeFilter(logging.Filter):
    """Adds `sim_time` to every record: "t=512.3ms" inside a run, "-" outside."""

    def filter(self, record: logging.LogRecord) -> bool:
        now = _simulated_ms.get()
        record.sim_time = "-" if now is None else f"t={now:.1f}ms"
        return True


def get_log_level(level: Union[str, int]) -> int:
    """
    Raises:
        ValueError: If log level is invalid
    """
    if isinstance(level, int):
        return level
    if level.upper() in LOG_LEVELS:
        return LOG_LEVELS[level.upper()]
    raise ValueError(f"Invalid log level: {level}")


def setup_logging(
    log_file: Optional[Union[str, Path]] = None,
    log_level: Union[str, int] = "WARNING",
    verbose: bool = False,
) -> None:
    """
    Configure logging for the application.

    Simulation runs are chatty at INFO (every election and fault), so the
    CLI default is WARNING; --verbose switches to DEBUG.

    Args:
        log_file: Optional rotating log file
        log_level: Log level as string or int
        verbose: Enable verbose logging (overrides log_level to DEBUG)
    """
    level = logging.DEBUG if verbose else get_log_level(log_level)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    stamp = SimulatedTimeFilter()

    console_handler = RichHandler(
        console=Console(stderr=True),
        rich_tracebacks=True,
        markup=False,
        show_time=False,
        show_path=False,
    )
    console_handler.setFormatter(logging.Formatter("%(sim_time)s %(message)s"))
    console_handler.addFilter(stamp)
    console_handler.setLevel(level)
    root_logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=10 * 1024 * 1024,
            backupCount=5,
            encoding="utf-8",
        )
        file_handler.setFormatter(
            logging.Formatter(
                "%(asctime)s - %(sim_time)s - %(name)s - %(levelname)s - %(message)s"
            )
        )
        file_handler.addFilter(stamp)
        file_handler.setLevel(level)
        root_logger.addHandler(file_handler)


def get_logger(name: str) -> logging.Logger:
    """Logger under the package namespace, e.g. get_logger("sim.network")."""
    return logging.getLogger(f"consortium_ledger.{name}")


def log_exception(e: Exception, logger: logging.Logger = None) -> None:
    """Log an exception with its traceback, to the root logger by default."""
    if logger is None:
        logger = logging.getLogger()
    logger.error(f"Exception: {e.__class__.__name__}: {str(e)}", exc_info=True)
