"""Tests for Cayley graphs, expansion of vertex sets and eigenvalue solves."""

import math

import numpy as np
import pytest

from suzuki_lab.errors import CapacityError
from suzuki_lab.field import Field
from suzuki_lab.spectral import (
    CayleyGraph,
    build_cayley,
    cyclic_cayley,
    dense_spectrum,
    edge_form_expansion,
    multiplicity_probe,
    second_eigenvalue,
    spectral_report,
    sweep_cut,
    top_eigenpair,
    vertex_expansion,
)
from suzuki_lab.suzuki import GroupIndex, generates
from suzuki_lab.walks import random_pair


@pytest.fixture
def complete5() -> CayleyGraph:
    return cyclic_cayley(5, [1, 2, 3, 4])


@pytest.fixture
def cycle8() -> CayleyGraph:
    return cyclic_cayley(8, [1, -1, 2, -2])


# ---------------------------------------------------------------------------
# Graphs
# ---------------------------------------------------------------------------


class TestCyclicCayley:
    """Test the toy circulant graphs used as dense oracles."""

    def test_table(self, cycle8: CayleyGraph):
        assert cycle8.size == 8
        assert cycle8.degree == 4
        assert cycle8.table[0].tolist() == [1, 7, 2, 6]
        assert cycle8.is_connected()

    def test_step_set_must_be_symmetric(self):
        with pytest.raises(ValueError, match="not closed under negation"):
            cyclic_cayley(8, [1, 2])

    def test_dense_spectrum(self, complete5: CayleyGraph, cycle8: CayleyGraph):
        k5 = dense_spectrum(complete5)
        assert k5[-1] == pytest.approx(1.0)
        assert k5[:-1] == pytest.approx([-0.25] * 4)
        z8 = dense_spectrum(cycle8)
        assert z8[0] == pytest.approx(-0.5)
        assert z8[-2] == pytest.approx(math.cos(math.pi / 4) / 2)

    def test_dense_limit(self):
        with pytest.raises(CapacityError):
            dense_spectrum(cyclic_cayley(65, [1, -1]))

    def test_top_eigenpair(self, cycle8: CayleyGraph):
        top = top_eigenpair(cycle8)
        assert top.value == 1.0
        assert top.residual == pytest.approx(0.0, abs=1e-14)


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------


class TestExpansion:
    """Test expansion ratios of explicit vertex sets."""

    def test_vertex_expansion(self, cycle8: CayleyGraph):
        exp = vertex_expansion(cycle8, [0, 1])
        assert exp.boundary == 4
        assert exp.ratio == 2.0
        assert not exp.oversized

    def test_boolean_mask_input(self, cycle8: CayleyGraph):
        mask = np.zeros(8, dtype=bool)
        mask[[0, 1]] = True
        assert vertex_expansion(cycle8, mask).boundary == 4

    def test_edge_form_expansion(self, cycle8: CayleyGraph):
        exp = edge_form_expansion(cycle8, [0, 1])
        assert exp.symmetric_difference == 4
        assert exp.grown_size == 6
        assert exp.growth == 3.0

    def test_oversized_flag(self, cycle8: CayleyGraph):
        assert vertex_expansion(cycle8, range(5)).oversized

    def test_empty_set(self, cycle8: CayleyGraph):
        with pytest.raises(ValueError, match="empty set"):
            vertex_expansion(cycle8, [])

    def test_vertex_out_of_range(self, cycle8: CayleyGraph):
        with pytest.raises(IndexError):
            vertex_expansion(cycle8, [8])

    def test_sweep_cut(self, cycle8: CayleyGraph):
        vector = np.cos(2 * np.pi * np.arange(8) / 8)
        cut = sweep_cut(cycle8, vector)
        assert 1 <= cut.size <= 4
        assert cut.expansion == pytest.approx(edge_form_expansion(cycle8, cut.vertices).ratio)

    def test_sweep_cut_constant_vector(self, cycle8: CayleyGraph):
        cut = sweep_cut(cycle8, np.ones(8))
        assert cut.vertices.tolist() == [0]
        assert cut.expansion == 5.0

    def test_sweep_cut_ties_by_index(self, cycle8: CayleyGraph):
        vector = np.array([1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0])
        cut = sweep_cut(cycle8, vector)
        assert cut.vertices.tolist() == [0, 1, 2, 3]
        assert cut.expansion == 1.0

    def test_sweep_cut_shape(self, cycle8: CayleyGraph):
        with pytest.raises(ValueError, match="shape"):
            sweep_cut(cycle8, np.zeros(3))


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------


class TestSecondEigenvalue:
    """Test the matrix-free solver against the dense oracle."""

    def test_complete_graph(self, complete5: CayleyGraph):
        second = second_eigenvalue(complete5)
        assert second.converged
        assert second.lambda2.value == pytest.approx(-0.25, abs=1e-8)
        assert second.lambda_min.value == pytest.approx(-0.25, abs=1e-8)

    def test_cycle_with_double_steps(self, cycle8: CayleyGraph):
        second = second_eigenvalue(cycle8)
        assert second.lambda2.value == pytest.approx(math.cos(math.pi / 4) / 2, abs=1e-8)
        assert second.lambda_min.value == pytest.approx(-0.5, abs=1e-8)
        assert second.max_modulus == pytest.approx(0.5, abs=1e-8)

    def test_multiplicity(self, cycle8: CayleyGraph):
        lam = math.cos(math.pi / 4) / 2
        probe = multiplicity_probe(cycle8, lam)
        assert probe.count == 2
        assert not probe.exhausted

    def test_multiplicity_complete_count(self, complete5: CayleyGraph):
        probe = multiplicity_probe(complete5, -0.25)
        assert probe.count == 4
        assert not probe.exhausted

    def test_multiplicity_budget_exhausted(self, complete5: CayleyGraph):
        probe = multiplicity_probe(complete5, -0.25, count_budget=2)
        assert probe.count == 2
        assert probe.exhausted
        assert probe.is_lower_bound

    def test_report(self, cycle8: CayleyGraph, tmp_path):
        target = tmp_path / "vec.f64"
        report = spectral_report(cycle8, dump_to=target)
        assert report.connected
        assert report.within_bounds()
        assert report.spectral_gap == pytest.approx(0.5, abs=1e-8)
        assert target.stat().st_size == 8 * 8
        assert np.fromfile(target, dtype="<f8").shape == (8,)


@pytest.mark.slow
class TestSuzukiCayley:
    """Test the Cayley graph of Sz(8) for a generating pair."""

    def test_lambda2_below_one(self, gf8: Field, sz8_index: GroupIndex):
        pair = next(
            p
            for p in (random_pair(gf8, 0, "test-spectral", i) for i in range(20))
            if generates(p.a, p.b, index=sz8_index)
        )
        graph = build_cayley(sz8_index, pair)
        assert graph.size == 29120
        assert graph.is_connected()
        second = second_eigenvalue(graph, tol=1e-8)
        assert second.lambda2.value < 1 - 1e-3
