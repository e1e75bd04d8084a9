"""Experiment registry.

Each experiment module registers one function under its ``ExperimentName``.
The function receives a ``RunContext`` and returns an ``ExperimentReport``;
files other than the report itself (index caches, eigenvector dumps) are
requested through ``RunContext.artifact`` so the runner can hash them into
the manifest.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from suzuki_lab.config import ExperimentConfig, config_hash
from suzuki_lab.errors import ConfigError
from suzuki_lab.models import ExperimentName, ExperimentReport


@dataclass
class RunContext:
    config: ExperimentConfig
    run_dir: Path | None = None
    artifacts: list[tuple[Path, str]] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.config.seed

    def artifact(self, name: str, kind: str) -> Path | None:
        """Path for an extra output file, or None when nothing is written to disk."""
        if self.run_dir is None:
            return None
        path = self.run_dir / name
        self.artifacts.append((path, kind))
        return path

    def new_report(self, columns: list[str], q: int | None = None, **facts: Any) -> ExperimentReport:
        return ExperimentReport(
            experiment=self.config.name,
            q=self.config.q if q is None else q,
            seed=self.seed,
            config_hash=config_hash(self.config),
            columns=columns,
            facts=dict(facts),
        )


Experiment = Callable[[RunContext], ExperimentReport]

EXPERIMENTS: dict[ExperimentName, Experiment] = {}


def register(name: ExperimentName) -> Callable[[Experiment], Experiment]:
    def decorator(fn: Experiment) -> Experiment:
        EXPERIMENTS[name] = fn
        return fn

    return decorator


def get_experiment(name: str | ExperimentName) -> Experiment:
    try:
        key = ExperimentName(name)
    except ValueError:
        valid = ", ".join(e.value for e in ExperimentName)
        msg = f"unknown experiment {name!r} (valid: {valid})"
        raise ConfigError(msg) from None
    return EXPERIMENTS[key]
