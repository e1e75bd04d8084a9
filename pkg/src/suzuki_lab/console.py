"""Rich console output for run manifests, reports and summaries."""

from __future__ import annotations

import sys

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from suzuki_lab.models import CriterionStatus, ExperimentReport, ReportManifest, Summary


console = Console()

# Detect whether the terminal can handle emoji/Unicode.
_ENCODING = getattr(sys.stdout, "encoding", "utf-8") or "utf-8"
_USE_EMOJI = _ENCODING.lower().replace("-", "") in ("utf8", "utf16", "utf32")

if _USE_EMOJI:
    STATUS_STYLE = {
        CriterionStatus.PASS: ("✅", "green"),
        CriterionStatus.FAIL: ("❌", "red"),
        CriterionStatus.REPORT_ONLY: ("📏", "cyan"),
    }
else:
    STATUS_STYLE = {
        CriterionStatus.PASS: ("[OK]", "green"),
        CriterionStatus.FAIL: ("[XX]", "red"),
        CriterionStatus.REPORT_ONLY: ("[--]", "cyan"),
    }


def _icon(status: CriterionStatus) -> str:
    icon, _ = STATUS_STYLE[status]
    return icon


def _number(value: float | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int) or float(value).is_integer():
        return str(int(value))
    return f"{value:.6g}"


def print_manifest(manifest: ReportManifest, report: ExperimentReport | None = None, *, verbose: bool = False) -> None:
    """Header panel with the verdict, then one row per criterion."""
    console.print()
    overall_icon, overall_style = STATUS_STYLE[manifest.overall_status]
    console.print(
        Panel(
            f"[bold]{overall_icon} Overall: {manifest.overall_status.value.upper()}[/bold]\n"
            f"Pass: {manifest.passed_count}  Fail: {manifest.failed_count}  "
            f"Report-only: {manifest.report_only_count}\n"
            f"[dim]run {manifest.run_id}  config {manifest.config_hash[:12]}[/dim]",
            title=f"[bold]{manifest.experiment.value} q={manifest.q} seed={manifest.seed}[/bold]",
            border_style=overall_style,
            expand=False,
        )
    )

    table = Table(title="Criteria", show_lines=True)
    table.add_column("Criterion", style="bold")
    table.add_column("Status", justify="center")
    table.add_column("Measured", justify="right")
    table.add_column("Bound", justify="right")
    table.add_column("Shape", style="dim")
    table.add_column("Detail")
    for c in manifest.criteria:
        table.add_row(c.name, _icon(c.status), _number(c.measured), _number(c.bound), c.shape, c.detail)
    console.print(table)

    if verbose and report is not None and report.rows:
        rows = Table(title=f"Rows ({len(report.rows)})", show_lines=False)
        for column in report.columns:
            rows.add_column(column)
        for row in report.rows:
            rows.add_row(*(str(row.get(c, "")) for c in report.columns))
        console.print(rows)

    if verbose:
        files = Table(title="Files", show_lines=False)
        files.add_column("Path", style="bold")
        files.add_column("Kind")
        files.add_column("sha256", style="dim")
        for f in manifest.files:
            files.add_row(f.path, f.kind, f.sha256[:16])
        console.print(files)
    console.print()


def print_summary(summary: Summary) -> None:
    console.print()
    style = "red" if summary.failed_count else "green"
    console.print(
        Panel(
            f"[bold]{summary.run_count} runs[/bold]  q: {', '.join(str(q) for q in summary.q_values)}  "
            f"Failed criteria: {summary.failed_count}",
            title="[bold]Summary[/bold]",
            border_style=style,
            expand=False,
        )
    )
    table = Table(show_lines=False)
    table.add_column("q", justify="right")
    table.add_column("Experiment", style="bold")
    table.add_column("Criterion")
    table.add_column("Status", justify="center")
    table.add_column("Measured", justify="right")
    table.add_column("Bound", justify="right")
    table.add_column("Shape", style="dim")
    for r in summary.rows:
        table.add_row(
            str(r.q), r.experiment.value, r.criterion, _icon(r.status), _number(r.measured), _number(r.bound), r.shape
        )
    console.print(table)
    console.print()


def print_warnings(warnings: list[str]) -> None:
    for w in warnings:
        console.print(f"[yellow]warning:[/yellow] {w}")
