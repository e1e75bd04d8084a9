"""Tests for the runner: run directories, manifests, determinism and summaries."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from suzuki_lab.config import ExperimentConfig, config_hash, load_config, with_overrides
from suzuki_lab.errors import ConfigError, ManifestError, SchemaError
from suzuki_lab.models import SUMMARY_COLUMNS, CriterionStatus, ExperimentName
from suzuki_lab.runner import (
    MANIFEST_NAME,
    REPORT_CSV,
    REPORT_JSON,
    file_sha256,
    find_manifests,
    load_manifest,
    run,
    run_id_for,
    summarize,
    write_summary,
)
from suzuki_lab.serializers import read_csv


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _config(out_dir: Path, **overrides) -> ExperimentConfig:
    return with_overrides(ExperimentConfig(), out_dir=str(out_dir), field_degrees=[3, 5], **overrides)


@pytest.fixture
def field_run(tmp_path: Path):
    manifest, report = run("field-check", _config(tmp_path / "reports"))
    return tmp_path / "reports" / manifest.run_id, manifest, report


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


class TestRun:
    """run() writes a complete run directory."""

    def test_run_id(self, field_run):
        _, manifest, _ = field_run
        config = with_overrides(_config(Path("elsewhere")), name="field-check")
        assert manifest.run_id == run_id_for(config)
        assert manifest.run_id.startswith("field-check-q8-seed0-")
        assert manifest.config_hash == config_hash(config)

    def test_files_written(self, field_run):
        run_dir, manifest, _ = field_run
        kinds = {f.kind: f.path for f in manifest.files}
        assert kinds == {"report-json": REPORT_JSON, "report-csv": REPORT_CSV, "config": "config.toml"}
        assert (run_dir / MANIFEST_NAME).exists()

    def test_hashes_match(self, field_run):
        run_dir, manifest, _ = field_run
        for entry in manifest.files:
            assert file_sha256(run_dir / entry.path) == entry.sha256

    def test_report_passes(self, field_run):
        _, manifest, report = field_run
        assert manifest.exit_code == 0
        assert report.overall_status == CriterionStatus.PASS
        assert [r["m"] for r in report.rows] == [3, 5]

    def test_report_json_content(self, field_run):
        run_dir, _, _ = field_run
        data = json.loads((run_dir / REPORT_JSON).read_text(encoding="utf-8"))
        assert data["experiment"] == "field-check"
        assert data["schema"] == "suzuki-lab/report/v1"
        assert data["summary"]["failed_count"] == 0

    def test_csv_header(self, field_run):
        run_dir, _, report = field_run
        header = (run_dir / REPORT_CSV).read_text(encoding="utf-8").splitlines()[0]
        assert header == ",".join(report.columns)

    def test_saved_config_reloads(self, field_run):
        run_dir, manifest, _ = field_run
        assert config_hash(load_config(run_dir / "config.toml")) == manifest.config_hash

    def test_outputs_can_be_switched_off(self, tmp_path: Path):
        manifest, _ = run("field-check", _config(tmp_path, json=False, csv=False))
        assert [f.kind for f in manifest.files] == ["config"]

    def test_unknown_experiment(self, tmp_path: Path):
        with pytest.raises(ConfigError, match="unknown experiment"):
            run("bogus", _config(tmp_path))

    def test_enum_name_accepted(self, tmp_path: Path):
        manifest, _ = run(ExperimentName.FIELD_CHECK, _config(tmp_path))
        assert manifest.experiment == ExperimentName.FIELD_CHECK


# ---------------------------------------------------------------------------
# Determinism
# ---------------------------------------------------------------------------


class TestDeterminism:
    """Equal configurations give byte-identical reports."""

    def test_two_runs_identical(self, tmp_path: Path):
        first, _ = run("field-check", _config(tmp_path / "a"))
        second, _ = run("field-check", _config(tmp_path / "b"))
        a = (tmp_path / "a" / first.run_id / REPORT_JSON).read_bytes()
        b = (tmp_path / "b" / second.run_id / REPORT_JSON).read_bytes()
        assert a == b

    def test_run_id_ignores_out_dir(self, tmp_path: Path):
        first, _ = run("field-check", _config(tmp_path / "a"))
        second, _ = run("field-check", _config(tmp_path / "b"))
        assert first.run_id == second.run_id

    def test_verify_determinism_criterion(self, tmp_path: Path):
        manifest, _ = run("field-check", _config(tmp_path), check_determinism=True)
        last = manifest.criteria[-1]
        assert last.name == "determinism"
        assert last.status == CriterionStatus.PASS


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


class TestLoadManifest:
    """load_manifest verifies every listed file."""

    def test_round_trip(self, field_run):
        run_dir, manifest, _ = field_run
        loaded = load_manifest(run_dir)
        assert loaded.run_id == manifest.run_id
        assert loaded.criteria == manifest.criteria
        assert loaded.files == manifest.files

    def test_accepts_manifest_path(self, field_run):
        run_dir, manifest, _ = field_run
        assert load_manifest(run_dir / MANIFEST_NAME).run_id == manifest.run_id

    def test_tampered_file(self, field_run):
        run_dir, _, _ = field_run
        with (run_dir / REPORT_CSV).open("a", encoding="utf-8") as f:
            f.write("tampered\n")
        with pytest.raises(ManifestError, match="does not match"):
            load_manifest(run_dir)

    def test_missing_file(self, field_run):
        run_dir, _, _ = field_run
        (run_dir / REPORT_JSON).unlink()
        with pytest.raises(ManifestError, match="is missing"):
            load_manifest(run_dir)

    def test_unreadable_manifest(self, tmp_path: Path):
        with pytest.raises(ManifestError, match="cannot read manifest"):
            load_manifest(tmp_path)

    def test_wrong_schema(self, field_run):
        run_dir, _, _ = field_run
        path = run_dir / MANIFEST_NAME
        data = json.loads(path.read_text(encoding="utf-8"))
        data["schema"] = "suzuki-lab/report/v0"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(SchemaError, match="v0"):
            load_manifest(run_dir)

    def test_malformed_manifest(self, field_run):
        run_dir, _, _ = field_run
        path = run_dir / MANIFEST_NAME
        data = json.loads(path.read_text(encoding="utf-8"))
        del data["run_id"]
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ManifestError, match="malformed"):
            load_manifest(run_dir)

    def test_find_manifests(self, tmp_path: Path):
        run("field-check", _config(tmp_path, seed=1))
        run("field-check", _config(tmp_path, seed=2))
        found = find_manifests(tmp_path)
        assert len(found) == 2
        assert find_manifests(found[0]) == [found[0]]


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------


class TestSummarize:
    """summarize merges the criteria of several runs."""

    def test_rows_per_criterion(self, tmp_path: Path):
        manifests = [run("field-check", _config(tmp_path, seed=s))[0] for s in (1, 2)]
        summary = summarize(manifests)
        assert summary.run_count == 2
        assert summary.q_values == [8]
        assert len(summary.rows) == sum(len(m.criteria) for m in manifests)
        keys = [(r.q, r.experiment.value, r.criterion, r.run_id) for r in summary.rows]
        assert keys == sorted(keys)

    def test_empty(self):
        with pytest.raises(ManifestError, match="nothing to summarize"):
            summarize([])

    def test_mixed_schemas(self, tmp_path: Path):
        first, _ = run("field-check", _config(tmp_path, seed=1))
        second, _ = run("field-check", _config(tmp_path, seed=2))
        second.schema = "suzuki-lab/report/v0"
        with pytest.raises(SchemaError, match="mixed schemas"):
            summarize([first, second])

    def test_write_summary(self, tmp_path: Path):
        manifest, _ = run("field-check", _config(tmp_path / "runs"))
        written = write_summary(summarize([manifest]), tmp_path / "out")
        assert [p.name for p in written] == ["summary.json", "summary.csv"]
        rows = read_csv(tmp_path / "out" / "summary.csv")
        assert list(rows[0]) == SUMMARY_COLUMNS
        assert {r["experiment"] for r in rows} == {"field-check"}
