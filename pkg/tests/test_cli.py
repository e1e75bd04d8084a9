"""Tests for the suzuki-lab command line."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from suzuki_lab.cli import main
from suzuki_lab.config import EXAMPLE_CONFIG


SMALL_CONFIG = """
[experiment]
seed = 4

[budgets]
field_degrees = [3]
"""


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def small_config(tmp_path: Path) -> Path:
    path = tmp_path / "suzuki-lab.toml"
    path.write_text(SMALL_CONFIG, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Experiment subcommands
# ---------------------------------------------------------------------------


class TestExperimentCommand:
    """Experiment subcommands write a run directory and exit by verdict."""

    def test_field_check_passes(self, runner: CliRunner, small_config: Path, tmp_path: Path):
        out = tmp_path / "reports"
        result = runner.invoke(main, ["--config", str(small_config), "--out-dir", str(out), "field-check", "--quiet"])
        assert result.exit_code == 0
        manifests = list(out.rglob("manifest.json"))
        assert len(manifests) == 1
        assert manifests[0].parent.name.startswith("field-check-q8-seed4-")

    def test_json_output(self, runner: CliRunner, small_config: Path, tmp_path: Path):
        result = runner.invoke(
            main,
            ["--config", str(small_config), "--out-dir", str(tmp_path), "--seed", "11", "--json", "field-check"],
        )
        assert result.exit_code == 0
        data = json.loads(result.stdout)
        assert data["experiment"] == "field-check"
        assert data["seed"] == 11
        assert data["summary"]["failed_count"] == 0

    def test_table_output(self, runner: CliRunner, small_config: Path, tmp_path: Path):
        result = runner.invoke(main, ["--config", str(small_config), "--out-dir", str(tmp_path), "field-check"])
        assert result.exit_code == 0
        assert "Overall: PASS" in result.stdout

    def test_bad_q_exits_2(self, runner: CliRunner, small_config: Path, tmp_path: Path):
        result = runner.invoke(
            main, ["--config", str(small_config), "--out-dir", str(tmp_path), "--q", "16", "field-check"]
        )
        assert result.exit_code == 2

    def test_all_experiments_registered(self, runner: CliRunner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for name in ("field-check", "enumerate", "girth", "walk", "nonconc", "spectral", "polycount", "wordlaw"):
            assert name in result.stdout
        assert "sl2-trace" in result.stdout


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------


class TestSummarizeCommand:
    """summarize collects manifests from run directories."""

    def test_summarize(self, runner: CliRunner, small_config: Path, tmp_path: Path):
        runs = tmp_path / "runs"
        for seed in ("1", "2"):
            result = runner.invoke(
                main, ["--config", str(small_config), "--out-dir", str(runs), "--seed", seed, "field-check", "--quiet"]
            )
            assert result.exit_code == 0
        out = tmp_path / "summary"
        result = runner.invoke(main, ["--config", str(small_config), "summarize", str(runs), "--out", str(out)])
        assert result.exit_code == 0
        assert (out / "summary.json").exists()
        assert (out / "summary.csv").exists()
        data = json.loads((out / "summary.json").read_text(encoding="utf-8"))
        assert data["summary"]["run_count"] == 2

    def test_summarize_nothing(self, runner: CliRunner, small_config: Path, tmp_path: Path):
        empty = tmp_path / "empty"
        empty.mkdir()
        result = runner.invoke(main, ["--config", str(small_config), "summarize", str(empty)])
        assert result.exit_code == 2


# ---------------------------------------------------------------------------
# config group
# ---------------------------------------------------------------------------


class TestConfigCommands:
    """config init / show / validate."""

    def test_init_writes_example(self, runner: CliRunner, tmp_path: Path):
        path = tmp_path / "suzuki-lab.toml"
        result = runner.invoke(main, ["--config", str(path), "config", "init"])
        assert result.exit_code == 0
        assert path.read_text(encoding="utf-8") == EXAMPLE_CONFIG

    def test_init_refuses_to_overwrite(self, runner: CliRunner, small_config: Path):
        result = runner.invoke(main, ["--config", str(small_config), "config", "init"])
        assert result.exit_code == 1
        assert small_config.read_text(encoding="utf-8") == SMALL_CONFIG

    def test_show_applies_flags(self, runner: CliRunner, small_config: Path):
        result = runner.invoke(main, ["--config", str(small_config), "--seed", "99", "config", "show"])
        assert result.exit_code == 0
        assert "seed = 99" in result.stdout
        assert "field_degrees = [" in result.stdout

    def test_validate_ok(self, runner: CliRunner, small_config: Path):
        result = runner.invoke(main, ["--config", str(small_config), "config", "validate"])
        assert result.exit_code == 0
        assert "Config is valid" in result.stdout

    def test_validate_missing_file(self, runner: CliRunner, tmp_path: Path):
        result = runner.invoke(main, ["--config", str(tmp_path / "none.toml"), "config", "validate"])
        assert result.exit_code == 0
        assert "No config file found" in result.stdout

    def test_validate_warnings_exit_1(self, runner: CliRunner, tmp_path: Path):
        path = tmp_path / "suzuki-lab.toml"
        path.write_text("[budgets]\nwidgets = 1\n", encoding="utf-8")
        result = runner.invoke(main, ["--config", str(path), "config", "validate"])
        assert result.exit_code == 1
        assert "budgets.widgets" in result.stdout

    def test_validate_error_exit_2(self, runner: CliRunner, tmp_path: Path):
        path = tmp_path / "suzuki-lab.toml"
        path.write_text("[experiment]\nq = 4\n", encoding="utf-8")
        result = runner.invoke(main, ["--config", str(path), "config", "validate"])
        assert result.exit_code == 2
