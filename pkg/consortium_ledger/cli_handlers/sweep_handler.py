"""
Handler for the `sweep` command.

Runs a scenario for every (value, seed) pair of one parameter, writes the
per-run rows as CSV and reports the per-value means. When the swept
parameter is the signature interval the handler also checks the expected
tradeoff: with the interval ascending, throughput per unit of work and mean
time to commit must both be non-decreasing.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
from rich.table import Table

from consortium_ledger.common.exceptions import ConfigurationError, ConsortiumLedgerError
from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.project_logging import console
from consortium_ledger.result import ErrorType, Result
from consortium_ledger.sim import is_monotone, load_scenario, parse_values, run_sweep, summarize
from consortium_ledger.sim.metrics import write_csv

from .base_handler import CommandHandler, CommandResult, error_from_exception

logger = logging.getLogger("consortium_ledger.cli.sweep")

TRADEOFF_EXIT_CODE = 1
VIOLATION_EXIT_CODE = 18


def parse_param(text: str) -> Tuple[str, List[Any]]:
    """
    "signature_interval=1,10,100" -> ("signature_interval", [1, 10, 100])

    Raises:
        ConfigurationError: If the text has no name or no values
    """
    name, sep, values = text.partition("=")
    name = name.strip()
    parsed = parse_values(values)
    if not sep or not name or not parsed:
        raise ConfigurationError(f"expected name=v1,v2,... but got {text!r}", "param")
    return name, parsed


def tradeoff_holds(summary: Sequence[Dict[str, Any]]) -> Dict[str, bool]:
    """Monotonicity of the per-value means, values taken in ascending order."""
    ordered = sorted(summary, key=lambda line: line["value"])
    return {
        "throughput_rises": is_monotone([line["writes_per_work_s"] for line in ordered]),
        "commit_latency_rises": is_monotone(
            [line["median_time_to_commit_ms"] for line in ordered]
        ),
    }


class SweepCommandHandler(CommandHandler):
    def __init__(
        self,
        scenario: str,
        param: str,
        seeds: int = 5,
        workers: int = 0,
        out: Optional[str] = None,
        summary_out: Optional[str] = None,
        check_tradeoff: Optional[bool] = None,
        show_progress: bool = True,
        output_format: str = "text",
        config: Optional[AppConfig] = None,
    ):
        """
        Args:
            scenario: Scenario file
            param: "name=v1,v2,..."
            seeds: Seeds 0..seeds-1 are run for each value
            workers: Worker processes; 0 means one per CPU
            out: CSV file for the per-run rows
            summary_out: CSV file for the per-value means
            check_tradeoff: Check the signature interval tradeoff; None
                checks it when the swept parameter is the signature interval
        """
        super().__init__(output_format, config)
        self.scenario = scenario
        self.param = param
        self.seeds = seeds
        self.workers = workers
        self.out = out
        self.summary_out = summary_out
        self.check_tradeoff = check_tradeoff
        self.show_progress = show_progress

    def handle(self) -> CommandResult:
        try:
            name, values = parse_param(self.param)
            scenario = load_scenario(self.scenario)
            rows = run_sweep(
                scenario,
                name,
                values,
                list(range(self.seeds)),
                workers=self.workers,
                base_config=self.config,
                show_progress=self.show_progress,
                use_rich=self.config.ui.color_output,
            )
        except ConsortiumLedgerError as e:
            return Result.failure([error_from_exception(e, ErrorType.INVALID_ARGUMENT)])

        summary = summarize(rows)
        if self.out:
            write_csv(rows, self.out)
        if self.summary_out:
            write_csv(summary, self.summary_out)

        violations = sum(row["violations"] for row in rows)
        check = self.check_tradeoff
        if check is None:
            check = name.split(".")[-1] == "signature_interval"
        tradeoff = tradeoff_holds(summary) if check else {}

        success = violations == 0 and all(tradeoff.values())
        exit_code = 0
        if violations:
            exit_code = VIOLATION_EXIT_CODE
        elif not success:
            exit_code = TRADEOFF_EXIT_CODE
        return Result.success(
            {
                "success": success,
                "exit_code": exit_code,
                "param": name,
                "values": values,
                "runs": len(rows),
                "violations": violations,
                "summary": summary,
                "tradeoff": tradeoff,
                "out": self.out,
            }
        )

    def render_text(self, stats: Dict[str, Any]) -> None:
        table = Table(title=f"Sweep over {stats['param']}", show_header=True)
        columns = ("value", "runs", "writes/work s", "writes/s", "median commit ms", "violations")
        for column in columns:
            table.add_column(column, justify="right")

        def fmt(x):
            return "-" if x is None else f"{x:.1f}"

        for line in stats["summary"]:
            table.add_row(
                str(line["value"]),
                str(line["runs"]),
                fmt(line["writes_per_work_s"]),
                fmt(line["write_throughput"]),
                fmt(line["median_time_to_commit_ms"]),
                str(line["violations"]),
            )
        console.print(table)
        for name, holds in stats["tradeoff"].items():
            colour = "green" if holds else "red"
            console.print(f"[{colour}]{name}: {'yes' if holds else 'no'}[/{colour}]")
        if stats["violations"]:
            console.print(f"[red]{stats['violations']} invariant violations[/red]")
        if stats["out"]:
            console.print(f"Rows written to {stats['out']}")

    @classmethod
    def from_click_context(cls, ctx: click.Context) -> "SweepCommandHandler":
        params = ctx.params
        config = cls.load_config(ctx)
        output_format = params.get("format") or "text"
        return cls(
            scenario=params["scenario"],
            param=params["param"],
            seeds=config.sweep.seeds,
            workers=config.sweep.workers,
            out=params.get("out"),
            summary_out=params.get("summary_out"),
            check_tradeoff=params.get("check_tradeoff"),
            show_progress=config.ui.progress_bars and output_format == "text",
            output_format=output_format,
            config=config,
        )
