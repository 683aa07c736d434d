"""
Base CLI handler for consortium ledger.

This module provides a base class for CLI command handlers, defining
common functionality and interfaces.
"""

import json
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import click

from consortium_ledger.common.encoding import from_hex
from consortium_ledger.common.exceptions import (
    ConsortiumLedgerError,
    EncodingError,
    ValidationError,
)
from consortium_ledger.config.config_manager import config_manager
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.project_logging import console, setup_logging
from consortium_ledger.result import ErrorType, OperationError, Result

logger = logging.getLogger("consortium_ledger.cli")

CommandResult = Result[Dict[str, Any], List[OperationError]]


def read_service_id(path: Union[str, Path]) -> bytes:
    """
    Read a service identity file: the hex public id on a single line.

    Raises:
        ValidationError: If the file is unreadable or not hex
    """
    try:
        text = Path(path).read_text(encoding="utf-8").strip()
        return from_hex(text, "service_id")
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e}", "service_id")
    except EncodingError as e:
        raise ValidationError(f"{path}: {e.message}", "service_id")


def error_from_exception(
    e: Exception, error_type: ErrorType = ErrorType.UNKNOWN
) -> OperationError:
    """OperationError carrying the exit code of a ConsortiumLedgerError."""
    error = OperationError.from_exception(e, error_type)
    if isinstance(e, ConsortiumLedgerError):
        error.message = e.message
        error.details["exit_code"] = e.exit_code
    return error


class CommandHandler(ABC):
    """
    Abstract base class for CLI command handlers.

    A handler turns click parameters into a call into the library and
    reports back through a Result. Checks that ran but did not pass are
    successes whose statistics say `"success": False`; only inputs that
    could not be processed at all are failures.
    """

    def __init__(
        self, output_format: str = "text", config: Optional[AppConfig] = None
    ):
        """
        Args:
            output_format: "text" for people, "json" for scripts
            config: Loaded configuration
        """
        self.output_format = output_format
        self.config = config or AppConfig()

    @abstractmethod
    def handle(self) -> CommandResult:
        """
        Handle the command.

        Returns:
            Result with statistics or list of errors
        """
        pass

    @classmethod
    @abstractmethod
    def from_click_context(cls, ctx: click.Context) -> "CommandHandler":
        pass

    @staticmethod
    def load_config(ctx: click.Context) -> AppConfig:
        """Apply the command's parameters to the configuration and set up logging."""
        config = config_manager.apply_click_context(ctx)
        setup_logging(
            log_file=config.logging.log_file,
            log_level=config.logging.log_level,
            verbose=config.logging.verbose,
        )
        return config

    def render_text(self, stats: Dict[str, Any]) -> None:
        """Human-readable report; handlers override this."""
        colour = "green" if stats.get("success") else "red"
        console.print(f"[{colour}]{stats.get('message', 'done')}[/{colour}]")

    def handle_result(self, result: CommandResult) -> Dict[str, Any]:
        """
        Print the outcome and return the statistics.

        The returned dictionary always carries `success` and `exit_code`.
        """
        if result.is_success():
            stats = dict(result.unwrap())
            stats.setdefault("success", True)
            stats.setdefault("exit_code", 0 if stats["success"] else 1)
            if self.output_format == "json":
                click.echo(json.dumps(stats, indent=2, sort_keys=True, default=str))
            else:
                self.render_text(stats)
            return stats

        errors = result.error()
        exit_code = next(
            (e.details["exit_code"] for e in errors if e.details and "exit_code" in e.details),
            1,
        )
        if self.output_format == "json":
            click.echo(
                json.dumps(
                    {
                        "success": False,
                        "exit_code": exit_code,
                        "errors": [str(e) for e in errors],
                    },
                    indent=2,
                )
            )
        else:
            console.print(f"[red]Command failed with {len(errors)} errors:[/red]")
            for i, error in enumerate(errors):
                console.print(f"{i+1}. {error}", style="red", markup=False)
        for error in errors:
            logger.debug(f"{error}", exc_info=error.source_exception)
        return {"success": False, "exit_code": exit_code, "errors": errors}
