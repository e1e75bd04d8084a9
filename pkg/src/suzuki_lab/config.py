"""Experiment configuration for suzuki-lab.

Reads an optional TOML file with ``[experiment]``, ``[budgets]``,
``[thresholds]`` and ``[output]`` sections.  Every key has a default, so an
empty file (or no file) gives the acceptance-scale configuration.  CLI
flags override file values through ``with_overrides``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import tomli_w

from suzuki_lab.errors import ConfigError
from suzuki_lab.models import ExperimentName


if sys.version_info >= (3, 12):
    import tomllib
else:
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:
        import tomli as tomllib  # type: ignore[import-untyped, no-redef]


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

DEFAULT_CONFIG_NAME = "suzuki-lab.toml"
CONFIG_FILE_NAME = "config.toml"

# Desk-scale limits; the modules enforcing them carry their own copies.
MAX_EXACT_Q = 8  # full GroupIndex, exact convolution, Cayley graphs
MAX_INDEX_Q = 32  # parameter-only GroupIndex
MAX_FIELD_DEGREE = 31
MAX_GIRTH_RADIUS = 10
WALK_BUDGET = 10**9
EXACT_GRID_LIMIT = 1 << 24


# ---------------------------------------------------------------------------
# Configuration dataclasses
# ---------------------------------------------------------------------------


@dataclass
class ExperimentSection:
    """What to run and over which field."""

    name: str = ExperimentName.FIELD_CHECK.value
    q: int = 8
    q0: int = 2
    seed: int = 0


@dataclass
class BudgetsConfig:
    """Sample sizes, trial counts and schedules."""

    field_degrees: list[int] = field(default_factory=lambda: [3, 5, 7, 9])
    pairs: int = 100
    samples: int = 100_000
    subgroup_pairs: int = 1_000
    tuples: int = 1_000
    girth_radius: int = 6
    kesten_max: int = 12
    walk_steps: list[int] = field(default_factory=lambda: [5, 10, 20])
    walk_offsets: list[int] = field(default_factory=lambda: [0, 5])
    walk_pairs: int = 20
    nonconc_steps: int = 100
    trials: int = 10_000
    word_length: int = 8
    word_samples: int = 16
    sigma_pairs: int = 2_000
    spectral_pairs: int = 50
    max_iter: int = 10_000
    probe_budget: int = 16
    poly_count: int = 1_000
    poly_degrees: list[int] = field(default_factory=lambda: [1, 2, 3])
    poly_variables: list[int] = field(default_factory=lambda: [1, 2])
    poly_fields: list[int] = field(default_factory=lambda: [8, 32])
    twist_samples: int = 10_000
    twist_degrees: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    twist_fields: list[int] = field(default_factory=lambda: [8, 32, 128, 512])
    law_length: int = 8
    law_attempts: int = 50
    sl2_samples: int = 100_000
    sl2_q: int = 64
    sl2_steps: int = 200


@dataclass
class ThresholdsConfig:
    """Pass fractions, tolerances and bound constants."""

    delta0: float = 0.25
    schedule_constants: list[float] = field(default_factory=lambda: [5.0, 10.0, 20.0, 40.0])
    mass_tolerance: float = 1e-2
    generation_pass: float = 0.99
    girth_pass: float = 0.90
    nonconc_pass: float = 0.95
    spectral_pass: float = 0.95
    spectral_margin: float = 1e-3
    eigen_tol: float = 1e-10
    oracle_tol: float = 1e-8
    multiplicity_tol: float = 1e-6
    multiplicity_floor: int = 14
    z_limit: float = 5.0
    trace_constant: float = 10.0
    kappa: float = 0.25


@dataclass
class OutputConfig:
    """Where and how reports are written."""

    out_dir: Path = field(default_factory=lambda: Path("reports"))
    json: bool = True
    csv: bool = True
    cache_index: bool = False
    dump_vectors: bool = False


@dataclass
class ExperimentConfig:
    """Complete, resolved configuration for one run."""

    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    budgets: BudgetsConfig = field(default_factory=BudgetsConfig)
    thresholds: ThresholdsConfig = field(default_factory=ThresholdsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    unknown_keys: list[str] = field(default_factory=list, compare=False, repr=False)

    @property
    def name(self) -> ExperimentName:
        return ExperimentName(self.experiment.name)

    @property
    def q(self) -> int:
        return self.experiment.q

    @property
    def seed(self) -> int:
        return self.experiment.seed


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _expand_path(path_str: str) -> Path:
    """Expand ~ in a path string (relative paths stay relative)."""
    return Path(path_str).expanduser()


def _coerce(section: str, key: str, value: Any, default: Any) -> Any:
    """Check ``value`` against the type of the default it replaces."""
    where = f"[{section}] {key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            msg = f"{where} must be true or false, got {value!r}"
            raise ConfigError(msg)
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            msg = f"{where} must be an integer, got {value!r}"
            raise ConfigError(msg)
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            msg = f"{where} must be a number, got {value!r}"
            raise ConfigError(msg)
        return float(value)
    if isinstance(default, Path):
        if not isinstance(value, str):
            msg = f"{where} must be a path string, got {value!r}"
            raise ConfigError(msg)
        return _expand_path(value)
    if isinstance(default, list):
        if not isinstance(value, list) or not value:
            msg = f"{where} must be a non-empty list, got {value!r}"
            raise ConfigError(msg)
        return [_coerce(section, key, v, default[0]) for v in value]
    if not isinstance(value, str):
        msg = f"{where} must be a string, got {value!r}"
        raise ConfigError(msg)
    return value


def _parse_section(section: str, data: Any, target: Any, unknown: list[str]) -> Any:
    if not isinstance(data, dict):
        msg = f"[{section}] must be a table"
        raise ConfigError(msg)
    known = {f.name for f in dataclasses.fields(target)}
    for key, value in data.items():
        if key not in known:
            unknown.append(f"{section}.{key}")
            continue
        setattr(target, key, _coerce(section, key, value, getattr(target, key)))
    return target


def _parse_experiment_section(data: dict[str, Any], unknown: list[str]) -> ExperimentSection:
    """Parse [experiment] section from TOML."""
    experiment = _parse_section("experiment", data, ExperimentSection(), unknown)
    try:
        ExperimentName(experiment.name)
    except ValueError:
        valid = ", ".join(e.value for e in ExperimentName)
        msg = f"unknown experiment {experiment.name!r} (valid: {valid})"
        raise ConfigError(msg) from None
    for key in ("q", "q0"):
        _check_field_size(key, getattr(experiment, key))
    if experiment.seed < 0:
        msg = f"[experiment] seed must be >= 0, got {experiment.seed}"
        raise ConfigError(msg)
    return experiment


def _parse_budgets_section(data: dict[str, Any], unknown: list[str]) -> BudgetsConfig:
    """Parse [budgets] section from TOML."""
    budgets = _parse_section("budgets", data, BudgetsConfig(), unknown)
    for f in dataclasses.fields(budgets):
        value = getattr(budgets, f.name)
        values = value if isinstance(value, list) else [value]
        if any(v < 0 for v in values):
            msg = f"[budgets] {f.name} must be >= 0, got {value!r}"
            raise ConfigError(msg)
    if not 0 <= budgets.girth_radius <= MAX_GIRTH_RADIUS:
        msg = f"[budgets] girth_radius must be in 0..{MAX_GIRTH_RADIUS}, got {budgets.girth_radius}"
        raise ConfigError(msg)
    for m in budgets.field_degrees:
        if m % 2 == 0 or not 1 <= m <= MAX_FIELD_DEGREE:
            msg = f"[budgets] field_degrees must be odd and in 1..{MAX_FIELD_DEGREE}, got {m}"
            raise ConfigError(msg)
    return budgets


def _parse_thresholds_section(data: dict[str, Any], unknown: list[str]) -> ThresholdsConfig:
    """Parse [thresholds] section from TOML."""
    thresholds = _parse_section("thresholds", data, ThresholdsConfig(), unknown)
    if not 0 < thresholds.delta0 < 1:
        msg = f"[thresholds] delta0 must lie in (0, 1), got {thresholds.delta0}"
        raise ConfigError(msg)
    for key in ("generation_pass", "girth_pass", "nonconc_pass", "spectral_pass"):
        value = getattr(thresholds, key)
        if not 0 <= value <= 1:
            msg = f"[thresholds] {key} must lie in [0, 1], got {value}"
            raise ConfigError(msg)
    return thresholds


def _parse_output_section(data: dict[str, Any], unknown: list[str]) -> OutputConfig:
    """Parse [output] section from TOML."""
    return _parse_section("output", data, OutputConfig(), unknown)


def _check_field_size(key: str, q: int) -> None:
    m = q.bit_length() - 1
    if q < 2 or q != 1 << m or m % 2 == 0:
        msg = f"[experiment] {key} must be 2^m with m odd, got {q}"
        raise ConfigError(msg)


_SECTIONS = {
    "experiment": _parse_experiment_section,
    "budgets": _parse_budgets_section,
    "thresholds": _parse_thresholds_section,
    "output": _parse_output_section,
}


def config_from_mapping(data: dict[str, Any]) -> ExperimentConfig:
    """Build a config from parsed TOML data (sections as nested tables)."""
    unknown: list[str] = []
    config = ExperimentConfig()
    for key, value in data.items():
        parser = _SECTIONS.get(key)
        if parser is None:
            unknown.append(key)
            continue
        setattr(config, key, parser(value, unknown))
    config.unknown_keys = unknown
    return config


def load_config(config_path: Path | None = None) -> ExperimentConfig:
    """Load an experiment configuration from a TOML file.

    Args:
        config_path: Optional path to config file. Defaults to ./suzuki-lab.toml

    Returns:
        ExperimentConfig with values from file, or defaults if file doesn't exist

    Raises:
        ConfigError: If config file has syntax errors or invalid values
    """
    if config_path is None:
        config_path = Path(DEFAULT_CONFIG_NAME)

    if not config_path.exists():
        return ExperimentConfig()

    try:
        with config_path.open("rb") as f:
            data = tomllib.load(f)
    except (OSError, tomllib.TOMLDecodeError) as e:
        msg = f"Failed to parse config file {config_path}: {e}"
        raise ConfigError(msg) from e

    return config_from_mapping(data)


def with_overrides(config: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    """Copy of ``config`` with dotted-free overrides applied to whichever section owns the key.

    ``None`` values are skipped so unset CLI flags leave file values alone.
    """
    sections = {
        name: dataclasses.replace(getattr(config, name)) for name in ("experiment", "budgets", "thresholds", "output")
    }
    for key, value in overrides.items():
        if value is None:
            continue
        owner = next((s for s in sections.values() if key in {f.name for f in dataclasses.fields(s)}), None)
        if owner is None:
            msg = f"unknown configuration key {key!r}"
            raise ConfigError(msg)
        setattr(owner, key, value)
    # re-run the section checks on the merged values
    resolved = config_from_mapping(to_mapping(ExperimentConfig(**sections)))
    resolved.unknown_keys = list(config.unknown_keys)
    return resolved


def validate_config(config: ExperimentConfig) -> list[str]:
    """Return warnings for a parsed config (empty if nothing looks off).

    Hard errors were already raised as ``ConfigError`` while parsing; this
    reports unknown keys and settings that will hit a capacity limit.
    """
    warnings = [f"Unknown config key: {key}" for key in config.unknown_keys]

    exact_only = {ExperimentName.ENUMERATE, ExperimentName.WALK, ExperimentName.NONCONC, ExperimentName.SPECTRAL}
    if config.name in exact_only and config.q > MAX_EXACT_Q:
        warnings.append(
            f"{config.name.value} at q={config.q} needs q <= {MAX_EXACT_Q} for exact computation"
        )
    if config.experiment.q0 >= config.q:
        warnings.append(f"q0={config.experiment.q0} is not a proper subfield size of q={config.q}")
    elif (config.q.bit_length() - 1) % (config.experiment.q0.bit_length() - 1):
        warnings.append(f"GF({config.experiment.q0}) is not a subfield of GF({config.q})")
    if config.budgets.nonconc_steps * config.budgets.trials > WALK_BUDGET:
        warnings.append(f"nonconc_steps * trials exceeds the walk budget {WALK_BUDGET}")
    if config.budgets.sl2_samples < 10_000:
        warnings.append("sl2_samples below 10000: trace concentration will refuse to run")
    if not config.output.json and not config.output.csv:
        warnings.append("both output.json and output.csv are off; only the manifest is written")

    return warnings


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def to_mapping(config: ExperimentConfig) -> dict[str, Any]:
    """Plain nested dict of the four sections (Path → str)."""
    out: dict[str, Any] = {}
    for name in ("experiment", "budgets", "thresholds", "output"):
        section = dataclasses.asdict(getattr(config, name))
        out[name] = {k: str(v) if isinstance(v, Path) else v for k, v in section.items()}
    return out


def to_toml(config: ExperimentConfig) -> str:
    return tomli_w.dumps(to_mapping(config))


def write_config(config: ExperimentConfig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_toml(config), encoding="utf-8")
    return path


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON of everything except [output]."""
    payload = to_mapping(config)
    del payload["output"]
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


EXAMPLE_CONFIG = """# suzuki-lab experiment configuration
# Every setting is optional; delete anything you don't need to change.

[experiment]
# field-check | enumerate | girth | walk | nonconc | spectral | polycount | wordlaw | sl2-trace
name = "girth"
# q = 2^m with m odd; exact experiments need q <= 8
q = 8
# q0 = 2
seed = 42

[budgets]
# pairs = 100
# girth_radius = 6
# walk_steps = [5, 10, 20]
# nonconc_steps = 100
# trials = 10000
# poly_count = 1000
# twist_samples = 10000

[thresholds]
# delta0 = 0.25
# mass_tolerance = 0.01
# girth_pass = 0.9
# z_limit = 5.0

[output]
# out_dir = "reports"
# json = true
# csv = true
# cache_index = false
# dump_vectors = false
"""
