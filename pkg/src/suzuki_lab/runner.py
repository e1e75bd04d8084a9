"""Run experiments, write their reports and manifests, and summarize runs.

Layout of one run directory::

    <out_dir>/<experiment>-q<q>-seed<seed>-<hash8>/
        report.json     ExperimentReport (schema suzuki-lab/report/v1)
        report.csv      the report rows, header first
        config.toml     the resolved configuration
        manifest.json   ReportManifest with a sha256 per file above
        ...             artifacts an experiment asked for (index cache, vectors)

Reports are byte-identical for equal configurations.  Only the manifest
carries a timestamp.
"""

from __future__ import annotations

import hashlib
import json
import logging
import tempfile
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from suzuki_lab.config import CONFIG_FILE_NAME, ExperimentConfig, config_hash, with_overrides, write_config
from suzuki_lab.errors import ManifestError, SchemaError
from suzuki_lab.experiments import RunContext, get_experiment
from suzuki_lab.models import (
    SCHEMA,
    SUMMARY_COLUMNS,
    Criterion,
    CriterionStatus,
    ExperimentName,
    ExperimentReport,
    OutputFile,
    ReportManifest,
    Summary,
    SummaryRow,
)
from suzuki_lab.serializers import dumps, to_dict, write_csv, write_json


logger = logging.getLogger(__name__)

REPORT_JSON = "report.json"
REPORT_CSV = "report.csv"
MANIFEST_NAME = "manifest.json"
SUMMARY_JSON = "summary.json"
SUMMARY_CSV = "summary.csv"


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def run_id_for(config: ExperimentConfig) -> str:
    """``<experiment>-q<q>-seed<seed>-<first 8 hex of the config hash>``."""
    return f"{config.name.value}-q{config.q}-seed{config.seed}-{config_hash(config)[:8]}"


def report_text(report: ExperimentReport) -> str:
    """Canonical JSON text of a report, the bytes the determinism check compares."""
    return dumps(to_dict(report))


def execute(config: ExperimentConfig, run_dir: Path | None = None) -> tuple[ExperimentReport, RunContext]:
    """Run the configured experiment; artifacts go to ``run_dir`` when given."""
    experiment = get_experiment(config.name)
    ctx = RunContext(config, run_dir)
    logger.info("running %s (q=%d, seed=%d)", config.name.value, config.q, config.seed)
    return experiment(ctx), ctx


def verify_determinism(config: ExperimentConfig, expected: str) -> Criterion:
    """Re-run into a scratch directory and compare the report bytes with ``expected``."""
    with tempfile.TemporaryDirectory(prefix="suzuki-lab-") as scratch:
        again, _ = execute(config, Path(scratch))
        text = report_text(again)
    same = text == expected
    if not same:
        logger.warning("%s: rerun produced a different report", config.name.value)
    return Criterion.check(
        "determinism",
        same,
        "a second run with the same seed produced byte-identical report JSON",
    )


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def run(
    experiment: ExperimentName | str,
    config: ExperimentConfig,
    *,
    check_determinism: bool = False,
) -> tuple[ReportManifest, ExperimentReport]:
    """Execute ``experiment`` under ``config`` and write its run directory.

    Raises:
        ConfigError: unknown experiment name or invalid configuration
        CapacityError: the configuration exceeds a desk-scale limit
    """
    config = with_overrides(config, name=str(experiment))
    run_id = run_id_for(config)
    run_dir = config.output.out_dir / run_id
    run_dir.mkdir(parents=True, exist_ok=True)

    report, ctx = execute(config, run_dir)
    if check_determinism:
        report.criteria.append(verify_determinism(config, report_text(report)))

    written: list[tuple[Path, str]] = []
    if config.output.json:
        path = run_dir / REPORT_JSON
        path.write_text(report_text(report), encoding="utf-8")
        written.append((path, "report-json"))
    if config.output.csv:
        written.append((write_csv(run_dir / REPORT_CSV, report.columns, report.rows), "report-csv"))
    written.append((write_config(config, run_dir / CONFIG_FILE_NAME), "config"))
    written.extend((path, kind) for path, kind in ctx.artifacts if path.exists())

    manifest = ReportManifest(
        run_id=run_id,
        experiment=config.name,
        q=report.q,
        seed=config.seed,
        config_hash=report.config_hash,
        files=[OutputFile(path.relative_to(run_dir).as_posix(), file_sha256(path), kind) for path, kind in written],
        criteria=list(report.criteria),
    )
    write_json(run_dir / MANIFEST_NAME, manifest)
    logger.info(
        "%s: %d pass, %d fail, %d report-only",
        run_id,
        manifest.passed_count,
        manifest.failed_count,
        manifest.report_only_count,
    )
    return manifest, report


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


def manifest_from_dict(data: dict[str, Any]) -> ReportManifest:
    schema = data.get("schema")
    if schema != SCHEMA:
        msg = f"manifest schema {schema!r} is not {SCHEMA!r}"
        raise SchemaError(msg)
    try:
        return ReportManifest(
            run_id=data["run_id"],
            experiment=ExperimentName(data["experiment"]),
            q=int(data["q"]),
            seed=int(data["seed"]),
            config_hash=data["config_hash"],
            files=[OutputFile(**f) for f in data.get("files", [])],
            criteria=[
                Criterion(
                    name=c["name"],
                    status=CriterionStatus(c["status"]),
                    detail=c.get("detail", ""),
                    measured=c.get("measured"),
                    bound=c.get("bound"),
                    shape=c.get("shape", ""),
                )
                for c in data.get("criteria", [])
            ],
            timestamp=data.get("timestamp", ""),
            schema=schema,
        )
    except (KeyError, TypeError, ValueError) as e:
        msg = f"malformed manifest: {e}"
        raise ManifestError(msg) from e


def load_manifest(path: Path) -> ReportManifest:
    """Read a manifest (or a run directory) and verify every listed file.

    Raises:
        SchemaError: the manifest was written under another schema
        ManifestError: unreadable manifest, missing file or hash mismatch
    """
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        msg = f"cannot read manifest {path}: {e}"
        raise ManifestError(msg) from e
    manifest = manifest_from_dict(data)
    for entry in manifest.files:
        target = path.parent / entry.path
        if not target.exists():
            msg = f"{manifest.run_id}: listed file {entry.path} is missing"
            raise ManifestError(msg)
        if file_sha256(target) != entry.sha256:
            msg = f"{manifest.run_id}: {entry.path} does not match its recorded sha256"
            raise ManifestError(msg)
    return manifest


def find_manifests(root: Path) -> list[Path]:
    """Manifest files under ``root`` (itself a manifest, a run directory, or a tree of runs)."""
    if root.is_file():
        return [root]
    return sorted(root.rglob(MANIFEST_NAME))


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------


def summarize(manifests: Sequence[ReportManifest]) -> Summary:
    """One row per (q, experiment, criterion, run), sorted by that key."""
    if not manifests:
        msg = "nothing to summarize: no manifests given"
        raise ManifestError(msg)
    schemas = {m.schema for m in manifests}
    if len(schemas) > 1:
        msg = f"cannot summarize mixed schemas: {', '.join(sorted(schemas))}"
        raise SchemaError(msg)
    rows = [
        SummaryRow(
            q=m.q,
            experiment=m.experiment,
            criterion=c.name,
            status=c.status,
            measured=c.measured,
            bound=c.bound,
            shape=c.shape,
            run_id=m.run_id,
        )
        for m in manifests
        for c in m.criteria
    ]
    rows.sort(key=lambda r: (r.q, r.experiment.value, r.criterion, r.run_id))
    return Summary(rows=rows, schema=schemas.pop())


def write_summary(summary: Summary, out_dir: Path, *, json_out: bool = True, csv_out: bool = True) -> list[Path]:
    written = []
    if json_out:
        written.append(write_json(out_dir / SUMMARY_JSON, summary))
    if csv_out:
        rows = [to_dict(r) for r in summary.rows]
        written.append(write_csv(out_dir / SUMMARY_CSV, SUMMARY_COLUMNS, rows))
    return written
