import sys
from pathlib import Path

import click

from consortium_ledger.common.exceptions import ConsortiumLedgerError
from consortium_ledger.config.config_manager import config_manager
from consortium_ledger.project_logging import console, log_exception


def print_version(ctx, param, value):
    """Print the version and exit"""
    if not value or ctx.resilient_parsing:
        return
    from importlib.metadata import PackageNotFoundError, version

    try:
        ver = version("consortium_ledger")
    except PackageNotFoundError:
        from consortium_ledger import __version__ as ver
    click.echo(f"Consortium Ledger {ver}")
    ctx.exit()


# Common command options
common_options = [
    click.option(
        "--config",
        help="Path to config file",
        type=click.Path(exists=True, dir_okay=False),
    ),
    click.option("--verbose", "-v", is_flag=True, help="Enable verbose output"),
    click.option(
        "--log-file", help="Path to log file", type=click.Path(dir_okay=False)
    ),
    click.option(
        "--log-level",
        help="Log level",
        type=click.Choice(
            ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], case_sensitive=False
        ),
    ),
    click.option(
        "--format",
        "format",
        type=click.Choice(["text", "json"], case_sensitive=False),
        default="text",
        help="Human-readable text or a JSON document on standard output",
    ),
]

scenario_option = click.option(
    "--scenario",
    "-s",
    required=True,
    help="Scenario file (YAML, JSON or TOML)",
    type=click.Path(exists=True, dir_okay=False),
)

member_key_option = click.option(
    "--member-key",
    "-k",
    required=True,
    help="Member key file written by keygen",
    type=click.Path(exists=True, dir_okay=False),
)


def add_options(options):
    """Add multiple options to a command"""

    def _add_options(func):
        for option in reversed(options):
            func = option(func)
        return func

    return _add_options


@click.group()
@click.option(
    "--version",
    is_flag=True,
    callback=print_version,
    expose_value=False,
    is_eager=True,
    help="Show version and exit",
)
def cli():
    """Consortium Ledger - simulate, audit and recover a confidential consortium ledger."""
    pass


@cli.command()
@click.option(
    "--format",
    "-f",
    type=click.Choice(["yaml", "json"]),
    default="yaml",
    help="Output format for the configuration template",
)
@click.option(
    "--output",
    "-o",
    type=click.Path(file_okay=True, dir_okay=False),
    help="Output file for the configuration template. If not specified, prints to stdout.",
)
def generate_config(format, output):
    """
    Generate a configuration file template.

    Creates a configuration file template holding every default value.
    """
    try:
        template = config_manager.generate_template(format)

        if output:
            output_path = Path(output)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, "w") as f:
                f.write(template)
            console.print(
                f"[green]Configuration template written to {output_path}[/green]"
            )
        else:
            click.echo(template)

    except Exception as e:
        log_exception(e)
        console.print(f"[red]Error generating configuration template: {str(e)}[/red]")
        sys.exit(1)


@cli.command()
@scenario_option
@click.option("--seed", type=int, help="Seed; overrides the scenario's own")
@click.option(
    "--out",
    "-o",
    help="Directory for trace.jsonl, metrics.csv, summary.json and ledgers/",
    type=click.Path(file_okay=False),
)
@click.option(
    "--trace-messages", is_flag=True, help="Record every message delivery in the trace"
)
@click.option(
    "--receipts",
    type=click.IntRange(min=0),
    default=0,
    help="Write receipts for this many committed client writes to receipts/",
)
@add_options(common_options)
@click.pass_context
def run(ctx, **kwargs):
    """
    Run one scenario.

    Exits non-zero when any safety invariant is violated.
    """
    from consortium_ledger.cli_patterns import handle_run_command

    handle_run_command(ctx)


@cli.command()
@click.option(
    "--ledger-dir",
    "-l",
    required=True,
    help="Directory of ledger chunk files",
    type=click.Path(exists=True, file_okay=False),
)
@click.option(
    "--service-id",
    help="Service identity file; defaults to service_id in the ledger directory",
    type=click.Path(exists=True, dir_okay=False),
)
@add_options(common_options)
@click.pass_context
def audit(ctx, **kwargs):
    """
    Audit a ledger against a service identity.

    Verifies the entry digests, the Merkle roots of every signature, the
    signers' endorsements and the member signatures of governance requests.
    Exits non-zero and names the first bad entry when verification fails.
    """
    from consortium_ledger.cli_patterns import handle_audit_command

    handle_audit_command(ctx)


@cli.command("verify-receipt")
@click.option(
    "--receipt",
    "-r",
    required=True,
    help="Receipt file",
    type=click.Path(exists=True, dir_okay=False),
)
@click.option(
    "--service-id",
    required=True,
    help="Service identity file",
    type=click.Path(exists=True, dir_okay=False),
)
@add_options(common_options)
@click.pass_context
def verify_receipt(ctx, **kwargs):
    """
    Verify a transaction receipt offline.
    """
    from consortium_ledger.cli_patterns import handle_verify_receipt_command

    handle_verify_receipt_command(ctx)


@cli.command()
@scenario_option
@click.option(
    "--param",
    "-p",
    required=True,
    help="Parameter and values, e.g. signature_interval=1,10,100,1000",
)
@click.option("--seeds", type=click.IntRange(min=1), help="Seeds per value")
@click.option(
    "--workers", type=click.IntRange(min=0), help="Worker processes; 0 means one per CPU"
)
@click.option(
    "--out", "-o", help="CSV file for the per-run rows", type=click.Path(dir_okay=False)
)
@click.option(
    "--summary-out",
    help="CSV file for the per-value means",
    type=click.Path(dir_okay=False),
)
@click.option("--no-progress", is_flag=True, help="Hide the progress bar")
@click.option(
    "--check-tradeoff/--no-check-tradeoff",
    default=None,
    help="Check the signature interval tradeoff (default: when sweeping signature_interval)",
)
@add_options(common_options)
@click.pass_context
def sweep(ctx, **kwargs):
    """
    Sweep one parameter over several values and seeds.
    """
    from consortium_ledger.cli_patterns import handle_sweep_command

    handle_sweep_command(ctx)


@cli.group()
def recover():
    """Disaster recovery from ledger files."""
    pass


@recover.command("start")
@click.option(
    "--ledger-dir",
    "-l",
    required=True,
    help="Ledger files of the previous service",
    type=click.Path(exists=True, file_okay=False),
)
@click.option(
    "--out",
    "-o",
    required=True,
    help="Directory for the recovered ledger and identity",
    type=click.Path(file_okay=False),
)
@click.option("--node-id", default="r0", help="Id of the recovery node")
@click.option("--seed", type=int, default=0, help="Seed of the new keys")
@click.option(
    "--committed-only",
    is_flag=True,
    help="Stop at the last signature the files mark as committed",
)
@add_options(common_options)
@click.pass_context
def recover_start(ctx, **kwargs):
    """
    Start a recovered service from a previous service's ledger files.
    """
    from consortium_ledger.cli_patterns import handle_recover_start_command

    handle_recover_start_command(ctx)


@recover.command("submit-share")
@click.option(
    "--ledger-dir",
    "-l",
    required=True,
    help="Ledger files holding the member's sealed share",
    type=click.Path(exists=True, file_okay=False),
)
@member_key_option
@click.option(
    "--out",
    "-o",
    required=True,
    help="Signed share submission to write",
    type=click.Path(dir_okay=False),
)
@add_options(common_options)
@click.pass_context
def recover_submit_share(ctx, **kwargs):
    """
    Open a member's recovery share and write the signed submission.
    """
    from consortium_ledger.cli_patterns import handle_submit_share_command

    handle_submit_share_command(ctx)


@cli.command()
@click.option("--member-id", "-m", required=True, help="Member id, e.g. m0")
@click.option(
    "--out",
    "-o",
    required=True,
    help="Private key file to write",
    type=click.Path(dir_okay=False),
)
@click.option(
    "--seed",
    type=int,
    help="Derive the keys a scenario with this seed gives the member",
)
@add_options(common_options)
@click.pass_context
def keygen(ctx, **kwargs):
    """
    Generate a member's signing and encryption keys.
    """
    from consortium_ledger.cli_patterns import handle_keygen_command

    handle_keygen_command(ctx)


@cli.command()
@member_key_option
@click.option(
    "--actions",
    "-a",
    required=True,
    help="Actions file (YAML, JSON or TOML)",
    type=click.Path(exists=True, dir_okay=False),
)
@click.option(
    "--out",
    "-o",
    required=True,
    help="Signed proposal to write",
    type=click.Path(dir_okay=False),
)
@click.option("--nonce", help="Distinguishes otherwise identical proposals")
@add_options(common_options)
@click.pass_context
def propose(ctx, **kwargs):
    """
    Write a signed governance proposal.
    """
    from consortium_ledger.cli_patterns import handle_propose_command

    handle_propose_command(ctx)


@cli.command()
@member_key_option
@click.option("--proposal-id", help="Id of the proposal voted on")
@click.option(
    "--proposal",
    help="Signed proposal file, instead of --proposal-id",
    type=click.Path(exists=True, dir_okay=False),
)
@click.option("--against", is_flag=True, help="Vote against")
@click.option(
    "--ballot",
    help="Conditional ballot document (YAML, JSON or TOML)",
    type=click.Path(exists=True, dir_okay=False),
)
@click.option(
    "--out",
    "-o",
    required=True,
    help="Signed ballot to write",
    type=click.Path(dir_okay=False),
)
@add_options(common_options)
@click.pass_context
def vote(ctx, **kwargs):
    """
    Write a signed ballot on a proposal.
    """
    from consortium_ledger.cli_patterns import handle_vote_command

    handle_vote_command(ctx)


def main():
    """Entry point for the application"""
    try:
        config_manager.load_configuration()

        cli()
    except ConsortiumLedgerError as e:
        log_exception(e)
        console.print(f"[red]Fatal error: {e.message}[/red]")
        sys.exit(e.exit_code)
    except Exception as e:
        log_exception(e)
        console.print(f"[red]Fatal error: {str(e)}[/red]")
        sys.exit(1)


if __name__ == "__main__":
    main()
