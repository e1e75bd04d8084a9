"""Tests for suzuki-lab report models."""

from suzuki_lab.models import (
    SCHEMA,
    Criterion,
    CriterionStatus,
    ExperimentName,
    ExperimentReport,
    ReportManifest,
    Summary,
    SummaryRow,
)


def _report(*criteria: Criterion) -> ExperimentReport:
    return ExperimentReport(
        experiment=ExperimentName.GIRTH,
        q=8,
        seed=0,
        config_hash="0" * 64,
        criteria=list(criteria),
    )


class TestExperimentName:
    """ExperimentName values are the CLI subcommand names."""

    def test_enum_values(self):
        assert [e.value for e in ExperimentName] == [
            "field-check",
            "enumerate",
            "girth",
            "walk",
            "nonconc",
            "spectral",
            "polycount",
            "wordlaw",
            "sl2-trace",
        ]

    def test_str_is_value(self):
        assert str(ExperimentName.SL2_TRACE) == "sl2-trace"


class TestCriterion:
    """Criterion.check and Criterion.report constructors."""

    def test_check_pass(self):
        c = Criterion.check("generation", True, measured=0.99, bound=0.99)
        assert c.status == CriterionStatus.PASS
        assert c.measured == 0.99

    def test_check_fail(self):
        assert Criterion.check("generation", False).status == CriterionStatus.FAIL

    def test_report_only(self):
        c = Criterion.report("sigma", "max sigma", measured=0.3, shape="q^-1/2 log q")
        assert c.status == CriterionStatus.REPORT_ONLY
        assert c.bound is None
        assert c.shape == "q^-1/2 log q"


class TestExperimentReport:
    """Counts and overall status of an ExperimentReport."""

    def test_empty_is_report_only(self):
        report = _report()
        assert report.overall_status == CriterionStatus.REPORT_ONLY
        assert report.schema == SCHEMA

    def test_counts(self):
        report = _report(
            Criterion.check("a", True),
            Criterion.check("b", True),
            Criterion.check("c", False),
            Criterion.report("d"),
        )
        assert report.passed_count == 2
        assert report.failed_count == 1
        assert report.report_only_count == 1

    def test_any_failure_fails(self):
        report = _report(Criterion.check("a", True), Criterion.check("b", False))
        assert report.overall_status == CriterionStatus.FAIL

    def test_pass_with_report_only(self):
        report = _report(Criterion.check("a", True), Criterion.report("b"))
        assert report.overall_status == CriterionStatus.PASS


class TestReportManifest:
    """Exit code follows the asserted criteria only."""

    def _manifest(self, *criteria: Criterion) -> ReportManifest:
        return ReportManifest(
            run_id="girth-q8-seed0-00000000",
            experiment=ExperimentName.GIRTH,
            q=8,
            seed=0,
            config_hash="0" * 64,
            criteria=list(criteria),
        )

    def test_exit_code_zero_on_pass(self):
        assert self._manifest(Criterion.check("a", True)).exit_code == 0

    def test_exit_code_zero_when_report_only(self):
        assert self._manifest(Criterion.report("a")).exit_code == 0

    def test_exit_code_one_on_failure(self):
        manifest = self._manifest(Criterion.check("a", True), Criterion.check("b", False))
        assert manifest.exit_code == 1
        assert manifest.overall_status == CriterionStatus.FAIL

    def test_timestamp_is_set(self):
        assert self._manifest().timestamp


class TestSummary:
    """Summary aggregates over rows."""

    def test_aggregates(self):
        rows = [
            SummaryRow(8, ExperimentName.GIRTH, "girth", CriterionStatus.PASS, 1.0, 0.9, "", "r1"),
            SummaryRow(8, ExperimentName.GIRTH, "sigma", CriterionStatus.REPORT_ONLY, 0.2, None, "", "r1"),
            SummaryRow(32, ExperimentName.WALK, "mass", CriterionStatus.FAIL, 0.5, 0.01, "", "r2"),
        ]
        summary = Summary(rows=rows)
        assert summary.run_count == 2
        assert summary.failed_count == 1
        assert summary.q_values == [8, 32]

    def test_empty(self):
        summary = Summary()
        assert summary.run_count == 0
        assert summary.q_values == []
