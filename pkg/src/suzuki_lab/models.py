"""Report models for suzuki-lab.

Typed dataclasses for experiment reports, per-criterion verdicts, run
manifests and cross-run summaries.  Everything here is plain data; the
mathematics lives in the domain modules and the experiments package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import UTC, datetime
from enum import StrEnum
from typing import Any


SCHEMA = "suzuki-lab/report/v1"


# ---------------------------------------------------------------------------
# Enums
# ---------------------------------------------------------------------------


class ExperimentName(StrEnum):
    """Experiments the runner can execute."""

    FIELD_CHECK = "field-check"
    ENUMERATE = "enumerate"
    GIRTH = "girth"
    WALK = "walk"
    NONCONC = "nonconc"
    SPECTRAL = "spectral"
    POLYCOUNT = "polycount"
    WORDLAW = "wordlaw"
    SL2_TRACE = "sl2-trace"


class CriterionStatus(StrEnum):
    """Verdict for one acceptance criterion."""

    PASS = "pass"  # asserted and holds
    FAIL = "fail"  # asserted and violated
    REPORT_ONLY = "report-only"  # measured against an unspecified constant


# ---------------------------------------------------------------------------
# Criteria and reports
# ---------------------------------------------------------------------------


@dataclass
class Criterion:
    """One asserted (or report-only) check inside an experiment."""

    name: str
    status: CriterionStatus
    detail: str = ""
    measured: float | None = None
    bound: float | None = None
    shape: str = ""  # bound shape the measurement is compared against, e.g. "q^-1/2 log q"

    @classmethod
    def check(
        cls,
        name: str,
        holds: bool,  # noqa: FBT001
        detail: str = "",
        *,
        measured: float | None = None,
        bound: float | None = None,
        shape: str = "",
    ) -> Criterion:
        status = CriterionStatus.PASS if holds else CriterionStatus.FAIL
        return cls(name, status, detail, measured, bound, shape)

    @classmethod
    def report(
        cls,
        name: str,
        detail: str = "",
        *,
        measured: float | None = None,
        bound: float | None = None,
        shape: str = "",
    ) -> Criterion:
        return cls(name, CriterionStatus.REPORT_ONLY, detail, measured, bound, shape)


@dataclass
class ExperimentReport:
    """Outcome of one experiment run: verdicts plus the CSV table behind them.

    ``rows`` share the keys listed in ``columns``; ``facts`` holds scalar
    measurements worth keeping in the JSON but not in the table.
    """

    experiment: ExperimentName
    q: int
    seed: int
    config_hash: str
    criteria: list[Criterion] = field(default_factory=list)
    columns: list[str] = field(default_factory=list)
    rows: list[dict[str, Any]] = field(default_factory=list)
    facts: dict[str, Any] = field(default_factory=dict)
    schema: str = SCHEMA

    @property
    def passed_count(self) -> int:
        return sum(1 for c in self.criteria if c.status == CriterionStatus.PASS)

    @property
    def failed_count(self) -> int:
        return sum(1 for c in self.criteria if c.status == CriterionStatus.FAIL)

    @property
    def report_only_count(self) -> int:
        return sum(1 for c in self.criteria if c.status == CriterionStatus.REPORT_ONLY)

    @property
    def overall_status(self) -> CriterionStatus:
        if self.failed_count:
            return CriterionStatus.FAIL
        if self.passed_count:
            return CriterionStatus.PASS
        return CriterionStatus.REPORT_ONLY


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


@dataclass
class OutputFile:
    """A file written by a run, relative to the manifest's directory."""

    path: str
    sha256: str
    kind: str = ""  # "report-json", "report-csv", "config", "index-cache", "eigenvector"


@dataclass
class ReportManifest:
    """Record of one run: what was executed, what was written, how it went."""

    run_id: str
    experiment: ExperimentName
    q: int
    seed: int
    config_hash: str
    files: list[OutputFile] = field(default_factory=list)
    criteria: list[Criterion] = field(default_factory=list)
    timestamp: str = field(default_factory=lambda: datetime.now(UTC).isoformat())
    schema: str = SCHEMA

    @property
    def passed_count(self) -> int:
        return sum(1 for c in self.criteria if c.status == CriterionStatus.PASS)

    @property
    def failed_count(self) -> int:
        return sum(1 for c in self.criteria if c.status == CriterionStatus.FAIL)

    @property
    def report_only_count(self) -> int:
        return sum(1 for c in self.criteria if c.status == CriterionStatus.REPORT_ONLY)

    @property
    def overall_status(self) -> CriterionStatus:
        if self.failed_count:
            return CriterionStatus.FAIL
        if self.passed_count:
            return CriterionStatus.PASS
        return CriterionStatus.REPORT_ONLY

    @property
    def exit_code(self) -> int:
        return 1 if self.failed_count else 0


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


SUMMARY_COLUMNS = ["q", "experiment", "criterion", "status", "measured", "bound", "shape", "run_id"]


@dataclass
class SummaryRow:
    q: int
    experiment: ExperimentName
    criterion: str
    status: CriterionStatus
    measured: float | None
    bound: float | None
    shape: str
    run_id: str


@dataclass
class Summary:
    """Criteria of several runs, one row per (q, experiment, criterion)."""

    rows: list[SummaryRow] = field(default_factory=list)
    schema: str = SCHEMA

    @property
    def run_count(self) -> int:
        return len({r.run_id for r in self.rows})

    @property
    def failed_count(self) -> int:
        return sum(1 for r in self.rows if r.status == CriterionStatus.FAIL)

    @property
    def q_values(self) -> list[int]:
        return sorted({r.q for r in self.rows})
