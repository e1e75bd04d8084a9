"""Tests for random walks on Sz(8) and their mass on subgroups."""

import math

import numpy as np
import pytest

from suzuki_lab.errors import CapacityError, FieldMismatchError
from suzuki_lab.field import Field, field_new
from suzuki_lab.seeding import rng_for
from suzuki_lab.suzuki import GroupIndex, enumerate_group, generates, random_element, subfield_subgroup
from suzuki_lab.walks import (
    GeneratorPair,
    MassEstimate,
    MassRow,
    WalkMode,
    agreement,
    borel_target,
    cauchy_schwarz_check,
    custom_target,
    cyclic_target,
    exact_walk,
    mass_trajectory,
    mu,
    n_schedule,
    nonconcentration_report,
    random_pair,
    sample_walk,
    sigma1_estimate,
    sigma2_estimate,
    subfield_target,
    subgroup_mass,
    symmetry_defect,
    total_variation,
)


@pytest.fixture(scope="module")
def pair(gf8: Field, sz8_index: GroupIndex) -> GeneratorPair:
    """First seeded pair that generates Sz(8)."""
    for label in range(20):
        candidate = random_pair(gf8, 1, "test-walks", label)
        if generates(candidate.a, candidate.b, index=sz8_index):
            return candidate
    pytest.fail("no generating pair among 20 seeded draws")


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------


class TestTargets:
    """Test subgroup targets and their predicates."""

    def test_borel_stationary_mass(self, gf8: Field):
        B = borel_target(gf8)
        assert B.order == 448
        assert B.stationary_mass() == pytest.approx(1 / 65)

    def test_borel_mask_size(self, gf8: Field, sz8_index: GroupIndex):
        assert borel_target(gf8).mask(sz8_index).sum() == 448

    def test_subfield_mask_size(self, gf8: Field, sz8_index: GroupIndex):
        H = subfield_target(subfield_subgroup(gf8, field_new(1)))
        assert H.order == 20
        assert H.mask(sz8_index).sum() == 20

    def test_conjugate_has_same_size(self, gf8: Field, sz8_index: GroupIndex):
        x = random_element(gf8, rng_for(2, "test-conjugator"))
        H = borel_target(gf8).conjugated(x)
        assert H.tag == "B^x"
        assert H.mask(sz8_index).sum() == 448

    def test_cyclic_target(self, gf8: Field, sz8_index: GroupIndex):
        g = random_element(gf8, rng_for(3, "test-cyclic"))
        H = cyclic_target(g)
        assert H.mask(sz8_index).sum() == H.order

    def test_custom_target_needs_members(self):
        with pytest.raises(ValueError, match="at least one"):
            custom_target("empty", [])

    def test_masks_need_full_index(self, gf32: Field):
        with pytest.raises(CapacityError):
            borel_target(gf32).mask(enumerate_group(gf32))


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


class TestDistributions:
    """Test exact and sampled walk distributions."""

    def test_pair_fields_must_match(self, gf8: Field, gf32: Field):
        rng = rng_for(4, "test-mismatch")
        with pytest.raises(FieldMismatchError):
            GeneratorPair(random_element(gf8, rng), random_element(gf32, rng))

    def test_one_step_sparse(self, pair: GeneratorPair):
        dist = mu(pair)
        assert dist.mode is WalkMode.SPARSE
        assert dist.total_mass() == pytest.approx(1.0)

    def test_one_step_exact_matches_sparse(self, gf8: Field, pair: GeneratorPair, sz8_index: GroupIndex):
        B = borel_target(gf8)
        sparse = subgroup_mass(mu(pair), B).mass
        exact = subgroup_mass(mu(pair, sz8_index), B).mass
        assert exact == pytest.approx(sparse)

    def test_exact_walk_keeps_mass(self, pair: GeneratorPair, sz8_index: GroupIndex):
        dist = exact_walk(pair, sz8_index, 10)
        assert dist.steps == 10
        assert dist.total_mass() == pytest.approx(1.0, abs=1e-10)

    def test_walk_is_symmetric(self, pair: GeneratorPair, sz8_index: GroupIndex):
        assert symmetry_defect(exact_walk(pair, sz8_index, 6)) < 1e-14

    def test_total_variation_decreases(self, pair: GeneratorPair, sz8_index: GroupIndex):
        early = total_variation(exact_walk(pair, sz8_index, 4))
        late = total_variation(exact_walk(pair, sz8_index, 60))
        assert late < early

    def test_zero_steps_is_in_every_subgroup(self, gf8: Field, pair: GeneratorPair, sz8_index: GroupIndex):
        dist = exact_walk(pair, sz8_index, 0)
        assert subgroup_mass(dist, borel_target(gf8)).mass == 1.0

    def test_sampling_is_reproducible(self, pair: GeneratorPair):
        first = sample_walk(pair, 5, 300, seed=7)
        second = sample_walk(pair, 5, 300, seed=7)
        assert np.array_equal(first.endpoint_matrices(), second.endpoint_matrices())

    def test_walk_budget(self, pair: GeneratorPair):
        with pytest.raises(CapacityError, match="walk budget"):
            sample_walk(pair, 10**6, 10**4, seed=0)

    def test_sampled_agrees_with_exact(self, gf8: Field, pair: GeneratorPair, sz8_index: GroupIndex):
        B = borel_target(gf8)
        exact = subgroup_mass(exact_walk(pair, sz8_index, 6), B)
        sampled = subgroup_mass(sample_walk(pair, 6, 4000, seed=3), B)
        assert sampled.trials == 4000
        assert abs(agreement(exact, sampled)) < 5


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------


class TestMeasurements:
    """Test the Cauchy-Schwarz step, trajectories and the mass table."""

    def test_cauchy_schwarz(self, gf8: Field, pair: GeneratorPair, sz8_index: GroupIndex):
        B = borel_target(gf8)
        for n, m in [(5, 0), (5, 5), (10, 3)]:
            assert cauchy_schwarz_check(pair, B, n, m, sz8_index).holds

    def test_trajectory_is_sorted(self, gf8: Field, pair: GeneratorPair, sz8_index: GroupIndex):
        traj = mass_trajectory(pair, borel_target(gf8), [20, 5, 10], sz8_index)
        assert [n for n, _ in traj] == [5, 10, 20]
        assert all(0.0 <= mass <= 1.0 for _, mass in traj)

    def test_n_schedule(self):
        assert n_schedule(8, [5, 10]) == [math.ceil(5 * math.log(8)), math.ceil(10 * math.log(8))]

    def test_agreement(self):
        assert agreement(MassEstimate(0.5), MassEstimate(0.5, 0.01, 100)) == 0.0
        assert agreement(MassEstimate(0.5), MassEstimate(0.6, 0.01, 100)) == pytest.approx(2.0)
        assert agreement(MassEstimate(0.5), MassEstimate(0.9)) == 0.0

    def test_mass_row_flag(self):
        row = MassRow(8, "p", "B", 10, 0.7, 0.0, 1 / 65, 8**-0.25)
        assert row.flagged
        assert not MassRow(8, "p", "B", 10, 0.1, 0.0, 1 / 65, 8**-0.25).flagged

    def test_nonconcentration_exact(self, gf8: Field, pair: GeneratorPair, sz8_index: GroupIndex):
        targets = [borel_target(gf8), subfield_target(subfield_subgroup(gf8, field_new(1)))]
        rows = nonconcentration_report(pair, [30, 10], targets, index=sz8_index)
        assert [(r.n, r.target) for r in rows] == [(10, "B"), (10, "Sz(2)"), (30, "B"), (30, "Sz(2)")]
        assert all(r.half_width == 0.0 for r in rows)
        assert rows[0].threshold == pytest.approx(8**-0.25)

    def test_nonconcentration_sampled(self, gf8: Field, pair: GeneratorPair):
        rows = nonconcentration_report(pair, [8], [borel_target(gf8)], trials=500, seed=2)
        assert len(rows) == 1
        assert rows[0].half_width > 0


class TestSigma:
    """Test the sigma_1 / sigma_2 Monte Carlo estimates."""

    def test_sigma1_runs(self, gf32: Field):
        est = sigma1_estimate(gf32, 4, 4, 50, rng_for(5, "test-sigma1"))
        assert est.samples == 200
        assert 0 <= est.hits <= est.samples
        assert est.bound_shape == pytest.approx(32 ** (-1 / 6) * math.log(32))

    def test_sigma2_hits_are_verified(self, gf8: Field):
        est = sigma2_estimate(gf8, 2, 8, 100, rng_for(6, "test-sigma2"))
        assert est.verified_hits == est.hits
        assert est.samples == 800
