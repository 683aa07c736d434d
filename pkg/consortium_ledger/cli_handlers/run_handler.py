"""
Handler for the `run` command: one scenario, one seed.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import click
from rich.table import Table

from consortium_ledger.common.exceptions import ConsortiumLedgerError
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.project_logging import console
from consortium_ledger.result import ErrorType, Result
from consortium_ledger.sim import load_scenario, run_scenario
from consortium_ledger.sim.checker import INVARIANTS

from .base_handler import CommandHandler, CommandResult, error_from_exception

logger = logging.getLogger("consortium_ledger.cli.run")

# Same code as InvariantViolationError
VIOLATION_EXIT_CODE = 18


class RunCommandHandler(CommandHandler):
    def __init__(
        self,
        scenario: str,
        seed: Optional[int] = None,
        out: Optional[str] = None,
        trace_messages: bool = False,
        receipts: int = 0,
        output_format: str = "text",
        config: Optional[AppConfig] = None,
    ):
        """
        Args:
            scenario: Scenario file
            seed: Overrides the scenario's seed
            out: Directory for trace, metrics and ledger files
            trace_messages: Record every message delivery in the trace
            receipts: Receipts to write for committed client writes
        """
        super().__init__(output_format, config)
        self.scenario = scenario
        self.seed = seed
        self.out = out
        self.trace_messages = trace_messages
        self.receipts = receipts

    def handle(self) -> CommandResult:
        try:
            scenario = load_scenario(self.scenario)
            if self.seed is not None:
                scenario = scenario.copy(update={"seed": self.seed})
            result = run_scenario(
                scenario,
                self.config,
                out_dir=self.out,
                record_messages=self.trace_messages,
                strict=False,
                receipts=self.receipts,
            )
        except ConsortiumLedgerError as e:
            return Result.failure([error_from_exception(e, ErrorType.INVALID_ARGUMENT)])

        violation = result.report.first_violation
        stats: Dict[str, Any] = {
            "success": result.ok,
            "exit_code": 0 if result.ok else VIOLATION_EXIT_CODE,
            "scenario": scenario.name,
            "seed": scenario.seed,
            "events": len(result.trace),
            "metrics": result.metrics.to_dict(),
            "invariants": {r.name: r.passed for r in result.report.results},
            "first_violation": f"{violation.name}: {violation.message}" if violation else None,
            "service_identities": result.service_identities(),
        }
        if self.out:
            stats["out"] = str(Path(self.out))
        return Result.success(stats)

    def render_text(self, stats: Dict[str, Any]) -> None:
        metrics = stats["metrics"]
        console.print(
            f"[bold]{stats['scenario']}[/bold] seed {stats['seed']}: "
            f"{stats['events']} events, {metrics['writes_ok']} writes accepted, "
            f"{metrics['writes_committed']} committed"
        )
        table = Table(show_header=True)
        table.add_column("Invariant")
        table.add_column("Result")
        for name in INVARIANTS:
            passed = stats["invariants"].get(name)
            table.add_row(name, "[green]pass[/green]" if passed else "[red]FAIL[/red]")
        console.print(table)
        if stats["success"]:
            console.print("[green]All invariants hold[/green]")
        else:
            console.print(f"[red]Invariant violated: {stats['first_violation']}[/red]")
        if "out" in stats:
            console.print(f"Outputs written to {stats['out']}")

    @classmethod
    def from_click_context(cls, ctx: click.Context) -> "RunCommandHandler":
        params = ctx.params
        config = cls.load_config(ctx)
        return cls(
            scenario=params["scenario"],
            seed=params.get("seed"),
            out=params.get("out"),
            trace_messages=params.get("trace_messages", False),
            receipts=params.get("receipts") or 0,
            output_format=params.get("format") or "text",
            config=config,
        )
