"""Tests for experiment configuration loading, overrides and validation."""

from __future__ import annotations

from pathlib import Path

import pytest

from suzuki_lab.config import (
    EXAMPLE_CONFIG,
    ExperimentConfig,
    config_from_mapping,
    config_hash,
    load_config,
    to_mapping,
    to_toml,
    validate_config,
    with_overrides,
    write_config,
)
from suzuki_lab.errors import ConfigError
from suzuki_lab.models import ExperimentName


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "suzuki-lab.toml"
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


class TestLoadConfig:
    """Tests for load_config."""

    def test_missing_file_gives_defaults(self, tmp_path: Path) -> None:
        config = load_config(tmp_path / "nope.toml")
        assert config == ExperimentConfig()
        assert config.name == ExperimentName.FIELD_CHECK
        assert config.q == 8
        assert config.seed == 0

    def test_reads_sections(self, tmp_path: Path) -> None:
        path = _write(
            tmp_path,
            '[experiment]\nname = "girth"\nq = 32\nseed = 7\n'
            "[budgets]\npairs = 12\nwalk_steps = [4, 8]\n"
            "[thresholds]\ndelta0 = 0.5\n"
            '[output]\nout_dir = "runs"\ncsv = false\n',
        )
        config = load_config(path)
        assert config.name == ExperimentName.GIRTH
        assert config.q == 32
        assert config.seed == 7
        assert config.budgets.pairs == 12
        assert config.budgets.walk_steps == [4, 8]
        assert config.thresholds.delta0 == 0.5
        assert config.output.out_dir == Path("runs")
        assert config.output.csv is False

    def test_integer_promoted_to_float(self, tmp_path: Path) -> None:
        config = load_config(_write(tmp_path, "[thresholds]\nz_limit = 4\n"))
        assert config.thresholds.z_limit == 4.0
        assert isinstance(config.thresholds.z_limit, float)

    def test_example_config_parses(self, tmp_path: Path) -> None:
        config = load_config(_write(tmp_path, EXAMPLE_CONFIG))
        assert config.name == ExperimentName.GIRTH
        assert config.seed == 42
        assert validate_config(config) == []

    def test_bad_toml(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError, match="Failed to parse"):
            load_config(_write(tmp_path, "[experiment\nname = "))

    def test_unknown_keys_recorded(self, tmp_path: Path) -> None:
        config = load_config(_write(tmp_path, "[budgets]\nwidgets = 3\n[extras]\nx = 1\n"))
        assert config.unknown_keys == ["budgets.widgets", "extras"]


# ---------------------------------------------------------------------------
# Value checks
# ---------------------------------------------------------------------------


class TestValueChecks:
    """Invalid values raise ConfigError while parsing."""

    @pytest.mark.parametrize("q", [4, 16, 1, 12])
    def test_q_must_be_odd_power_of_two(self, q: int) -> None:
        with pytest.raises(ConfigError, match="2\\^m with m odd"):
            config_from_mapping({"experiment": {"q": q}})

    def test_unknown_experiment(self) -> None:
        with pytest.raises(ConfigError, match="unknown experiment"):
            config_from_mapping({"experiment": {"name": "bogus"}})

    def test_negative_seed(self) -> None:
        with pytest.raises(ConfigError, match="seed must be >= 0"):
            config_from_mapping({"experiment": {"seed": -1}})

    def test_negative_budget(self) -> None:
        with pytest.raises(ConfigError, match="pairs must be >= 0"):
            config_from_mapping({"budgets": {"pairs": -5}})

    def test_girth_radius_range(self) -> None:
        with pytest.raises(ConfigError, match="girth_radius"):
            config_from_mapping({"budgets": {"girth_radius": 11}})

    def test_even_field_degree(self) -> None:
        with pytest.raises(ConfigError, match="field_degrees must be odd"):
            config_from_mapping({"budgets": {"field_degrees": [3, 4]}})

    @pytest.mark.parametrize("delta0", [0.0, 1.0, 1.5])
    def test_delta0_open_interval(self, delta0: float) -> None:
        with pytest.raises(ConfigError, match="delta0"):
            config_from_mapping({"thresholds": {"delta0": delta0}})

    def test_pass_fraction_range(self) -> None:
        with pytest.raises(ConfigError, match="girth_pass must lie"):
            config_from_mapping({"thresholds": {"girth_pass": 1.2}})

    def test_wrong_type(self) -> None:
        with pytest.raises(ConfigError, match="must be an integer"):
            config_from_mapping({"budgets": {"pairs": "many"}})

    def test_bool_is_not_an_integer(self) -> None:
        with pytest.raises(ConfigError, match="must be an integer"):
            config_from_mapping({"budgets": {"pairs": True}})

    def test_empty_list(self) -> None:
        with pytest.raises(ConfigError, match="non-empty list"):
            config_from_mapping({"budgets": {"walk_steps": []}})

    def test_section_must_be_table(self) -> None:
        with pytest.raises(ConfigError, match="must be a table"):
            config_from_mapping({"budgets": 3})


# ---------------------------------------------------------------------------
# Overrides
# ---------------------------------------------------------------------------


class TestWithOverrides:
    """Tests for with_overrides."""

    def test_applies_to_owning_section(self, tmp_path: Path) -> None:
        config = with_overrides(ExperimentConfig(), seed=9, pairs=3, out_dir=str(tmp_path), csv=False)
        assert config.seed == 9
        assert config.budgets.pairs == 3
        assert config.output.out_dir == tmp_path
        assert config.output.csv is False

    def test_none_leaves_value(self) -> None:
        base = with_overrides(ExperimentConfig(), seed=5)
        assert with_overrides(base, seed=None).seed == 5

    def test_does_not_mutate_input(self) -> None:
        base = ExperimentConfig()
        with_overrides(base, pairs=1)
        assert base.budgets.pairs == 100

    def test_unknown_key(self) -> None:
        with pytest.raises(ConfigError, match="unknown configuration key"):
            with_overrides(ExperimentConfig(), colour="red")

    def test_overrides_are_validated(self) -> None:
        with pytest.raises(ConfigError, match="2\\^m with m odd"):
            with_overrides(ExperimentConfig(), q=16)

    def test_unknown_keys_survive(self, tmp_path: Path) -> None:
        config = load_config(_write(tmp_path, "[budgets]\nwidgets = 3\n"))
        assert with_overrides(config, seed=1).unknown_keys == ["budgets.widgets"]


# ---------------------------------------------------------------------------
# Validation warnings
# ---------------------------------------------------------------------------


class TestValidateConfig:
    """Tests for validate_config."""

    def test_defaults_are_clean(self) -> None:
        assert validate_config(ExperimentConfig()) == []

    def test_unknown_key_warning(self) -> None:
        config = config_from_mapping({"output": {"colour": "red"}})
        assert validate_config(config) == ["Unknown config key: output.colour"]

    def test_exact_experiment_above_limit(self) -> None:
        config = config_from_mapping({"experiment": {"name": "enumerate", "q": 32}})
        assert any("exact computation" in w for w in validate_config(config))

    def test_q0_not_a_subfield(self) -> None:
        config = config_from_mapping({"experiment": {"q": 32, "q0": 8}})
        assert any("not a subfield" in w for w in validate_config(config))

    def test_q0_not_proper(self) -> None:
        config = config_from_mapping({"experiment": {"q": 8, "q0": 8}})
        assert any("not a proper subfield" in w for w in validate_config(config))

    def test_small_sl2_samples(self) -> None:
        config = config_from_mapping({"budgets": {"sl2_samples": 500}})
        assert any("sl2_samples" in w for w in validate_config(config))

    def test_no_outputs(self) -> None:
        config = config_from_mapping({"output": {"json": False, "csv": False}})
        assert any("only the manifest" in w for w in validate_config(config))


# ---------------------------------------------------------------------------
# Serialization and hashing
# ---------------------------------------------------------------------------


class TestSerialization:
    """Tests for to_toml, write_config and config_hash."""

    def test_toml_round_trip(self, tmp_path: Path) -> None:
        config = with_overrides(ExperimentConfig(), name="walk", seed=3, walk_steps=[2, 4], out_dir=str(tmp_path))
        path = write_config(config, tmp_path / "sub" / "config.toml")
        assert load_config(path) == config

    def test_mapping_stringifies_paths(self) -> None:
        assert to_mapping(ExperimentConfig())["output"]["out_dir"] == "reports"

    def test_toml_has_all_sections(self) -> None:
        text = to_toml(ExperimentConfig())
        for section in ("[experiment]", "[budgets]", "[thresholds]", "[output]"):
            assert section in text

    def test_hash_ignores_output(self, tmp_path: Path) -> None:
        base = ExperimentConfig()
        moved = with_overrides(base, out_dir=str(tmp_path), csv=False)
        assert config_hash(base) == config_hash(moved)

    def test_hash_tracks_seed_and_budgets(self) -> None:
        base = ExperimentConfig()
        assert config_hash(base) != config_hash(with_overrides(base, seed=1))
        assert config_hash(base) != config_hash(with_overrides(base, pairs=7))

    def test_hash_is_hex_sha256(self) -> None:
        digest = config_hash(ExperimentConfig())
        assert len(digest) == 64
        int(digest, 16)
