"""Tests for the registered experiments at reduced budgets."""

from __future__ import annotations

from pathlib import Path

import pytest

from suzuki_lab.config import ExperimentConfig, with_overrides
from suzuki_lab.errors import ConfigError
from suzuki_lab.experiments import EXPERIMENTS, get_experiment
from suzuki_lab.models import Criterion, CriterionStatus, ExperimentName, ExperimentReport
from suzuki_lab.runner import execute, report_text, run


def _execute(name: str, **overrides) -> ExperimentReport:
    report, _ = execute(with_overrides(ExperimentConfig(), name=name, **overrides))
    return report


def _criterion(report: ExperimentReport, name: str) -> Criterion:
    matches = [c for c in report.criteria if c.name == name]
    assert matches, f"no criterion {name!r} in {[c.name for c in report.criteria]}"
    return matches[0]


def _status(report: ExperimentReport, name: str) -> CriterionStatus:
    return _criterion(report, name).status


GIRTH_BUDGETS = {"pairs": 3, "girth_radius": 3, "kesten_max": 8, "tuples": 40, "trials": 200}


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


class TestRegistry:
    """Every ExperimentName has a registered function."""

    def test_all_registered(self):
        assert set(EXPERIMENTS) == set(ExperimentName)

    def test_lookup_by_value(self):
        assert get_experiment("sl2-trace") is EXPERIMENTS[ExperimentName.SL2_TRACE]

    def test_unknown_name(self):
        with pytest.raises(ConfigError, match="unknown experiment"):
            get_experiment("girth-2")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class TestReportShape:
    """Rows use the declared columns; criteria names are unique."""

    @pytest.mark.parametrize(
        ("name", "overrides"),
        [
            ("field-check", {"field_degrees": [3]}),
            ("girth", GIRTH_BUDGETS),
            ("wordlaw", {"law_length": 2}),
        ],
    )
    def test_shape(self, name: str, overrides: dict):
        report = _execute(name, **overrides)
        assert report.experiment == ExperimentName(name)
        assert report.rows
        for row in report.rows:
            assert set(row) <= set(report.columns)
        names = [c.name for c in report.criteria]
        assert len(names) == len(set(names))


class TestEnumerate:
    """enumerate over Sz(8)."""

    @pytest.fixture(scope="class")
    def report(self) -> ExperimentReport:
        return _execute("enumerate", samples=500, subgroup_pairs=20)

    def test_group_order(self, report):
        assert _status(report, "group-order") == CriterionStatus.PASS
        assert report.facts["group_order"] == 29120
        assert report.facts["borel_order"] == 448

    def test_closure(self, report):
        assert _status(report, "closure-factorization") == CriterionStatus.PASS

    def test_subfield_subgroup(self, report):
        assert _status(report, "subfield-subgroup") == CriterionStatus.PASS

    def test_index_cache_artifact(self, tmp_path: Path):
        config = with_overrides(
            ExperimentConfig(), samples=100, subgroup_pairs=5, cache_index=True, out_dir=str(tmp_path)
        )
        manifest, report = run("enumerate", config)
        assert "index-cache" in [f.kind for f in manifest.files]
        assert _status(report, "index-cache") == CriterionStatus.PASS


class TestGirth:
    """girth with a handful of pairs over Sz(8)."""

    @pytest.fixture(scope="class")
    def report(self) -> ExperimentReport:
        return _execute("girth", **GIRTH_BUDGETS)

    def test_one_row_per_pair(self, report):
        assert [r["pair"] for r in report.rows] == [0, 1, 2]

    def test_kesten(self, report):
        assert _status(report, "kesten") == CriterionStatus.PASS
        assert _status(report, "kesten-cross-check") == CriterionStatus.PASS
        assert report.facts["closed_walks"][:5] == [1, 0, 4, 0, 28]

    def test_involution_relation(self, report):
        assert _status(report, "involution-relation") == CriterionStatus.PASS

    def test_borel_solvable(self, report):
        assert _status(report, "borel-solvable") == CriterionStatus.PASS

    def test_free_centralisers(self, report):
        assert _status(report, "free-centralisers") == CriterionStatus.PASS

    def test_report_only_bounds(self, report):
        assert _status(report, "relation-probability") == CriterionStatus.REPORT_ONLY
        assert _status(report, "girth-union-bound") == CriterionStatus.REPORT_ONLY

    def test_girth_count_matches_rows(self, report):
        girth = _criterion(report, "girth")
        passed = sum(r["girth_passed"] for r in report.rows)
        assert girth.measured == passed
        assert girth.bound == 3  # ceil(0.9 * 3)
        expected = CriterionStatus.PASS if passed >= 3 else CriterionStatus.FAIL
        assert girth.status == expected

    def test_short_order_pairs_never_pass(self, report):
        short = [r for r in report.rows if r["min_order"] <= GIRTH_BUDGETS["girth_radius"]]
        assert not any(r["girth_passed"] for r in short)
        counted = _criterion(report, "girth-short-orders")
        assert counted.status == CriterionStatus.REPORT_ONLY
        assert counted.measured == len(short)

    def test_radius_one_always_passes(self):
        report = _execute("girth", **{**GIRTH_BUDGETS, "girth_radius": 1})
        girth = _criterion(report, "girth")
        assert girth.measured == 3
        assert girth.status == CriterionStatus.PASS

    def test_deterministic(self, report):
        assert report_text(_execute("girth", **GIRTH_BUDGETS)) == report_text(report)


class TestPolycount:
    """polycount at small fields and counts."""

    @pytest.fixture(scope="class")
    def report(self) -> ExperimentReport:
        return _execute(
            "polycount",
            poly_count=20,
            poly_fields=[8],
            poly_variables=[1],
            poly_degrees=[1, 2],
            twist_samples=20,
            twist_fields=[8, 32],
            twist_degrees=[1, 2],
        )

    def test_bounds_hold(self, report):
        assert _status(report, "twisted-schwartz-zippel") == CriterionStatus.PASS
        assert _status(report, "harder-twist") == CriterionStatus.PASS

    def test_cleared_inverse(self, report):
        assert _status(report, "cleared-inverse-scale") == CriterionStatus.PASS

    def test_word_coefficient_reported(self, report):
        assert _status(report, "word-coefficient-zeros") == CriterionStatus.REPORT_ONLY


class TestWordlaw:
    """wordlaw finds witnesses for every short word."""

    def test_short_words(self):
        report = _execute("wordlaw", law_length=2)
        assert _status(report, "word-laws") == CriterionStatus.PASS
        assert report.facts["inconclusive"] == []
        # 16 nontrivial reduced words of length <= 2, one per inversion class
        assert report.facts["words"] == 8
