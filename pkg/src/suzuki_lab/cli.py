"""CLI entry point for suzuki-lab.

Commands:
    suzuki-lab field-check | enumerate | girth | walk | nonconc
               spectral | polycount | wordlaw | sl2-trace
                               run one experiment, write its run directory
    suzuki-lab summarize       collect manifests into one comparison table
    suzuki-lab config          init / show / validate the TOML configuration

Global flags:
    --config      TOML configuration file (default ./suzuki-lab.toml)
    --seed/--q    override [experiment] values
    --out-dir     override [output] out_dir
    --json        print the manifest JSON to stdout instead of tables
"""

from __future__ import annotations

import json
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
from rich.console import Console
from rich.logging import RichHandler

from suzuki_lab import __version__
from suzuki_lab.config import (
    DEFAULT_CONFIG_NAME,
    EXAMPLE_CONFIG,
    ExperimentConfig,
    load_config,
    to_toml,
    validate_config,
    with_overrides,
)
from suzuki_lab.console import print_manifest, print_summary, print_warnings
from suzuki_lab.errors import CapacityError, ConfigError, LabError
from suzuki_lab.models import ExperimentName
from suzuki_lab.runner import find_manifests, load_manifest, run, summarize, write_summary
from suzuki_lab.serializers import to_dict


console = Console()
err_console = Console(stderr=True)

EXIT_FAILED = 1
EXIT_USAGE = 2


def _setup_logging(verbose: bool) -> None:  # noqa: FBT001
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _fail(e: LabError) -> None:
    err_console.print(f"[red]error:[/red] {e}")
    if isinstance(e, CapacityError) and e.hint:
        err_console.print(f"[dim]hint: {e.hint}[/dim]")
    sys.exit(EXIT_USAGE)


def _resolve_config(ctx: click.Context) -> ExperimentConfig:
    """File values, then the global CLI overrides."""
    obj = ctx.obj
    config = load_config(obj["config_path"])
    return with_overrides(
        config,
        seed=obj["seed"],
        q=obj["q"],
        out_dir=obj["out_dir"],
        json=obj["write_json"],
        csv=obj["write_csv"],
    )


# ---------------------------------------------------------------------------
# Main group
# ---------------------------------------------------------------------------


_MAIN_EPILOG = """
\b
CONCEPT
  suzuki-lab builds the Suzuki groups Sz(q), q = 2^(2n+1), from explicit
  4x4 matrices over GF(q) and checks, at desk scale, the ingredients of
  the expansion argument for their random Cayley graphs: girth, walk
  mass on proper subgroups, characteristic-polynomial concentration,
  twisted polynomial zero counts, word laws and spectral gaps.

\b
TYPICAL WORKFLOW
  1. suzuki-lab config init                 # write ./suzuki-lab.toml
  2. suzuki-lab --seed 42 girth             # one run directory under reports/
  3. suzuki-lab --q 8 nonconc --verify-determinism
  4. suzuki-lab summarize reports/          # summary.csv + summary.json

\b
EXIT CODES
  0  Every asserted criterion passed (report-only criteria never fail).
  1  At least one asserted criterion failed.
  2  Usage, configuration, capacity or manifest error.
"""


@click.group(epilog=_MAIN_EPILOG)
@click.version_option(version=__version__, prog_name="suzuki-lab")
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path, dir_okay=False),
    default=None,
    help=f"TOML configuration file (default ./{DEFAULT_CONFIG_NAME})",
)
@click.option("--seed", type=int, default=None, help="Master seed")
@click.option("--q", type=int, default=None, help="Field size q = 2^m, m odd")
@click.option("--out-dir", type=click.Path(path_type=Path, file_okay=False), default=None, help="Report directory")
@click.option("--json", "json_output", is_flag=True, help="Print the manifest JSON to stdout")
@click.option("--report-json/--no-report-json", "write_json", default=None, help="Write report.json")
@click.option("--csv/--no-csv", "write_csv", default=None, help="Write report.csv")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging on stderr")
@click.pass_context
def main(
    ctx: click.Context,
    config_path: Path | None,
    seed: int | None,
    q: int | None,
    out_dir: Path | None,
    json_output: bool,
    write_json: bool | None,
    write_csv: bool | None,
    verbose: bool,
) -> None:
    """Suzuki Lab: verification experiments for the Suzuki groups Sz(q).

    Each experiment subcommand writes a run directory with report.json,
    report.csv, the resolved config.toml and a manifest.json that records
    a sha256 per file and the verdict of every criterion.
    """
    _setup_logging(verbose)
    ctx.ensure_object(dict)
    ctx.obj.update(
        config_path=config_path,
        seed=seed,
        q=q,
        out_dir=str(out_dir) if out_dir is not None else None,
        json_output=json_output,
        write_json=write_json,
        write_csv=write_csv,
        verbose=verbose,
    )


# ---------------------------------------------------------------------------
# Experiment subcommands
# ---------------------------------------------------------------------------


_EXPERIMENT_HELP = {
    ExperimentName.FIELD_CHECK: "Exhaustive GF(2^m) identities and the subfield census.",
    ExperimentName.ENUMERATE: "Enumerate Sz(q): order formulas, closure, factorization, Sz(q0).",
    ExperimentName.GIRTH: "Generation and girth of random pairs, Kesten's bound, solvability of B.",
    ExperimentName.WALK: "Cauchy-Schwarz step, sigma estimates, exact vs sampled walks.",
    ExperimentName.NONCONC: "Exact walk mass on B and on a conjugate of Sz(q0).",
    ExperimentName.SPECTRAL: "lambda_2 of random Cayley graphs of Sz(q) and toy dense oracles.",
    ExperimentName.POLYCOUNT: "Twisted Schwartz-Zippel fractions and the 2 d^2 root bound.",
    ExperimentName.WORDLAW: "Witnesses that no short word is a law on Sz(q) minus B.",
    ExperimentName.SL2_TRACE: "SL2(q) comparison track: trace histograms and subfield mass.",
}


def _experiment_command(name: ExperimentName) -> Callable[..., None]:
    @click.option(
        "--verify-determinism",
        is_flag=True,
        help="Run twice and add a criterion comparing the report bytes",
    )
    @click.option("--quiet", is_flag=True, help="Exit code only")
    @click.pass_context
    def command(ctx: click.Context, verify_determinism: bool, quiet: bool) -> None:
        try:
            config = _resolve_config(ctx)
            manifest, report = run(name, config, check_determinism=verify_determinism)
        except LabError as e:
            _fail(e)
            return
        if ctx.obj["json_output"]:
            click.echo(json.dumps(to_dict(manifest), indent=2, sort_keys=True))
        elif not quiet:
            print_manifest(manifest, report, verbose=ctx.obj["verbose"])
        sys.exit(manifest.exit_code)

    command.__doc__ = _EXPERIMENT_HELP[name]
    return main.command(name=name.value)(command)


for _name in ExperimentName:
    _experiment_command(_name)


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------


@main.command(name="summarize")
@click.argument("paths", nargs=-1, type=click.Path(path_type=Path, exists=True))
@click.option("--out", "out", type=click.Path(path_type=Path, file_okay=False), default=None, help="Summary directory")
@click.pass_context
def summarize_command(ctx: click.Context, paths: tuple[Path, ...], out: Path | None) -> None:
    """Verify manifests and collect their criteria into one table.

    PATHS may be manifest files, run directories or trees of runs; the
    default is the configured out_dir.  Writes summary.json and
    summary.csv to --out (default: the out_dir).
    """
    try:
        config = _resolve_config(ctx)
        roots = list(paths) or [config.output.out_dir]
        manifest_paths = [p for root in roots for p in find_manifests(root)]
        summary = summarize([load_manifest(p) for p in manifest_paths])
        write_summary(summary, out or config.output.out_dir, json_out=config.output.json, csv_out=config.output.csv)
    except LabError as e:
        _fail(e)
        return
    if ctx.obj["json_output"]:
        click.echo(json.dumps(to_dict(summary), indent=2, sort_keys=True))
    else:
        print_summary(summary)
    sys.exit(EXIT_FAILED if summary.failed_count else 0)


# ---------------------------------------------------------------------------
# config command group
# ---------------------------------------------------------------------------


def _config_path(ctx: click.Context) -> Path:
    return ctx.obj["config_path"] or Path(DEFAULT_CONFIG_NAME)


@main.group()
def config() -> None:
    """Manage the suzuki-lab.toml experiment configuration."""


@config.command()
@click.pass_context
def init(ctx: click.Context) -> None:
    """Write an example suzuki-lab.toml."""
    path = _config_path(ctx)
    if path.exists():
        console.print(f"[yellow]Config file already exists at {path}[/yellow]")
        console.print("Run 'suzuki-lab config show' to view the resolved config")
        sys.exit(EXIT_FAILED)
    path.write_text(EXAMPLE_CONFIG, encoding="utf-8")
    console.print(f"[green]✓[/green] Created example config at {path}")
    console.print("Edit the file, then run 'suzuki-lab config validate'")


@config.command()
@click.pass_context
def show(ctx: click.Context) -> None:
    """Print the resolved configuration (defaults + file + flags) as TOML."""
    try:
        resolved = _resolve_config(ctx)
    except LabError as e:
        _fail(e)
        return
    path = _config_path(ctx)
    console.print(f"\n[bold]Configuration Source:[/bold] {path}")
    console.print(f"[dim]File exists: {path.exists()}[/dim]\n")
    click.echo(to_toml(resolved))


@config.command()
@click.pass_context
def validate(ctx: click.Context) -> None:
    """Check the configuration file for errors and suspicious settings."""
    path = _config_path(ctx)
    if not path.exists():
        console.print(f"[yellow]No config file found at {path}[/yellow]")
        console.print("Run 'suzuki-lab config init' to create an example config")
        sys.exit(0)
    try:
        resolved = _resolve_config(ctx)
    except ConfigError as e:
        console.print(f"[red]✗ Failed to load config:[/red] {e}")
        sys.exit(EXIT_USAGE)
    warnings = validate_config(resolved)
    if warnings:
        console.print("[red]✗ Config validation found problems:[/red]")
        print_warnings(warnings)
        sys.exit(EXIT_FAILED)
    summary: dict[str, Any] = {"experiment": resolved.name.value, "q": resolved.q, "seed": resolved.seed}
    console.print("[green]✓ Config is valid[/green]")
    console.print(f"  Path: {path}")
    console.print("  " + "  ".join(f"{k}={v}" for k, v in summary.items()))


if __name__ == "__main__":
    main()
