"""Tests for Sz(q): orders, Bruhat parameters, factorization and enumeration."""

import numpy as np
import pytest

from suzuki_lab.errors import CapacityError, FieldError, InternalConsistencyError
from suzuki_lab.field import Field, field_new
from suzuki_lab.seeding import rng_for
from suzuki_lab.suzuki import (
    NOT_MEMBER,
    BigCell,
    Borel,
    GenerationStatus,
    GroupIndex,
    Matrix4,
    assemble,
    assemble_batch,
    borel_order,
    charpoly_coeffs,
    element_order,
    enumerate_group,
    factorize,
    generates,
    group_order,
    identity,
    is_identity_batch,
    is_symplectic,
    matmul_batch,
    params_from_rank,
    random_element,
    random_params,
    subfield_subgroup,
    t_element,
)


# ---------------------------------------------------------------------------
# Orders
# ---------------------------------------------------------------------------


class TestOrders:
    """Test the order formulas."""

    def test_small_orders(self):
        assert group_order(2) == 20
        assert group_order(8) == 29120
        assert group_order(32) == 32537600
        assert borel_order(8) == 448

    @pytest.mark.parametrize("q", [1, 4, 6, 16])
    def test_invalid_q(self, q: int):
        with pytest.raises(FieldError, match="not 2\\^m with m odd"):
            group_order(q)


# ---------------------------------------------------------------------------
# Parameters and matrices
# ---------------------------------------------------------------------------


class TestBruhatParameters:
    """Test parameter validation and rank arithmetic."""

    def test_gamma_must_be_nonzero(self, gf8: Field):
        with pytest.raises(FieldError, match="gamma"):
            Borel(gf8, 1, 2, 0)
        with pytest.raises(FieldError, match="gamma"):
            BigCell(gf8, 1, 2, 0, 3, 4)

    def test_parameter_out_of_range(self, gf8: Field):
        with pytest.raises(FieldError, match="not an element"):
            Borel(gf8, 8, 0, 1)

    def test_rank_round_trip(self, gf8: Field):
        for rank in (0, 1, 447, 448, 449, 29119):
            assert params_from_rank(gf8, rank).rank == rank

    def test_identity_rank(self, gf8: Field):
        assert Borel(gf8, 0, 0, 1).rank == 0

    def test_rank_out_of_range(self, gf8: Field):
        with pytest.raises(IndexError):
            params_from_rank(gf8, group_order(8))

    def test_borel_comes_first(self, gf8: Field):
        assert isinstance(params_from_rank(gf8, borel_order(8) - 1), Borel)
        assert isinstance(params_from_rank(gf8, borel_order(8)), BigCell)


class TestElements:
    """Test assembled elements."""

    def test_identity(self, gf8: Field):
        assert identity(gf8).is_identity()

    def test_t_is_an_involution(self, gf8: Field):
        t = t_element(gf8)
        assert not t.is_identity()
        assert (t * t).is_identity()
        assert element_order(t) == 2

    def test_elements_are_symplectic(self, gf32: Field):
        rng = rng_for(3, "test-symplectic")
        for _ in range(20):
            assert is_symplectic(random_element(gf32, rng).matrix)

    def test_inverse(self, gf32: Field):
        rng = rng_for(4, "test-inverse")
        g = random_element(gf32, rng)
        assert (g * g.inverse()).is_identity()

    def test_element_orders_in_sz8(self, gf8: Field):
        rng = rng_for(5, "test-orders")
        for _ in range(30):
            assert element_order(random_element(gf8, rng)) in {1, 2, 4, 5, 7, 13}

    def test_charpoly_of_identity(self, gf8: Field):
        c1, c2, c3 = charpoly_coeffs(identity(gf8))
        # (lambda + 1)^4 = lambda^4 + 1 in characteristic 2
        assert (c1.bits, c2.bits, c3.bits) == (0, 0, 0)

    def test_charpoly_is_a_class_function(self, gf8: Field):
        rng = rng_for(6, "test-charpoly")
        g = random_element(gf8, rng)
        x = random_element(gf8, rng)
        conj = x.inverse() * g * x
        assert [c.bits for c in charpoly_coeffs(g)] == [c.bits for c in charpoly_coeffs(conj)]


class TestFactorize:
    """Test factorization of matrices back to Bruhat parameters."""

    def test_round_trip_random(self, gf32: Field):
        rng = rng_for(8, "test-factorize")
        for _ in range(50):
            g = random_element(gf32, rng)
            assert factorize(g.matrix) == g.params

    def test_round_trip_both_cells(self, gf8: Field):
        for p in (Borel(gf8, 3, 5, 7), BigCell(gf8, 1, 2, 3, 4, 5)):
            assert factorize(assemble(p).matrix) == p

    def test_non_member(self, gf8: Field):
        assert factorize(Matrix4(gf8, tuple(i % 8 for i in range(16)))) is NOT_MEMBER

    def test_non_member_lower_triangular(self, gf8: Field):
        entries = (2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1)
        assert factorize(Matrix4(gf8, entries)) is NOT_MEMBER

    def test_product_is_closed(self, gf32: Field):
        rng = rng_for(9, "test-closure")
        g, h = random_element(gf32, rng), random_element(gf32, rng)
        assert factorize(g.matrix @ h.matrix) is not NOT_MEMBER


# ---------------------------------------------------------------------------
# Batches
# ---------------------------------------------------------------------------


class TestBatches:
    """Test vectorized assembly and multiplication."""

    def test_assemble_batch_matches_scalar(self, gf32: Field):
        batch = random_params(gf32, rng_for(10, "test-batch"), 40)
        mats = assemble_batch(batch)
        for i, g in enumerate(batch.elements()):
            assert tuple(int(v) for v in mats[i].ravel()) == g.matrix.entries

    def test_matmul_batch_matches_scalar(self, gf8: Field):
        rng = rng_for(11, "test-matmul")
        g, h = random_element(gf8, rng), random_element(gf8, rng)
        A = np.asarray(g.matrix.entries).reshape(4, 4)
        B = np.asarray(h.matrix.entries).reshape(4, 4)
        assert tuple(matmul_batch(gf8, A, B).ravel().tolist()) == (g.matrix @ h.matrix).entries

    def test_is_identity_batch(self, gf8: Field):
        stack = np.stack([np.eye(4, dtype=np.int64), np.asarray(t_element(gf8).matrix.entries).reshape(4, 4)])
        assert is_identity_batch(stack).tolist() == [True, False]

    def test_big_cell_only(self, gf8: Field):
        batch = random_params(gf8, rng_for(12, "test-big"), 100, big_cell_only=True)
        assert batch.big.all()


# ---------------------------------------------------------------------------
# Subgroups and generation
# ---------------------------------------------------------------------------


class TestSubfieldSubgroup:
    """Test the embedded Sz(q0)."""

    def test_sz2_in_sz8(self, gf8: Field):
        sub = subfield_subgroup(gf8, field_new(1))
        elements = list(sub.elements())
        assert sub.order == 20
        assert len({g.params for g in elements}) == 20
        assert all(sub.contains(g) for g in elements)

    def test_closed_under_products(self, gf8: Field):
        sub = subfield_subgroup(gf8, field_new(1))
        rng = rng_for(13, "test-sub")
        for _ in range(20):
            g, h = sub.random_element(rng), sub.random_element(rng)
            assert sub.contains(g * h)

    def test_not_a_subfield(self, gf8: Field):
        with pytest.raises(FieldError, match="not a subfield"):
            subfield_subgroup(gf8, field_new(5))


class TestGenerates:
    """Test the breadth-first generation check."""

    def test_borel_pair_is_proper(self, gf8: Field, sz8_index: GroupIndex):
        a = assemble(Borel(gf8, 1, 0, 1))
        b = assemble(Borel(gf8, 0, 1, 2))
        result = generates(a, b, index=sz8_index)
        assert result.status is GenerationStatus.PROPER
        assert result.closure_size <= borel_order(8)
        assert not result

    def test_random_pairs_mostly_generate(self, gf8: Field, sz8_index: GroupIndex):
        rng = rng_for(14, "test-generates")
        wins = sum(
            bool(generates(random_element(gf8, rng), random_element(gf8, rng), index=sz8_index)) for _ in range(20)
        )
        assert wins >= 15

    def test_cap_gives_indeterminate(self, gf8: Field):
        rng = rng_for(15, "test-cap")
        result = generates(random_element(gf8, rng), random_element(gf8, rng), cap=10)
        assert result.status is GenerationStatus.INDETERMINATE
        with pytest.raises(InternalConsistencyError, match="indeterminate"):
            bool(result)

    def test_sz2_by_multiplication(self):
        fld = field_new(1)
        result = generates(t_element(fld), assemble(Borel(fld, 1, 0, 1)))
        assert result.closure_size <= 20


# ---------------------------------------------------------------------------
# GroupIndex
# ---------------------------------------------------------------------------


class TestGroupIndex:
    """Test enumeration of Sz(q)."""

    def test_full_index(self, sz8_index: GroupIndex):
        assert sz8_index.size == 29120
        assert sz8_index.has_matrices
        assert sz8_index.matrices.shape == (29120, 4, 4)
        assert sz8_index.borel_mask.sum() == 448

    def test_lookup_matches_rank(self, gf8: Field, sz8_index: GroupIndex):
        rng = rng_for(16, "test-lookup")
        g = random_element(gf8, rng)
        A = np.asarray(g.matrix.entries, dtype=np.int64).reshape(1, 4, 4)
        assert int(sz8_index.lookup(A)[0]) == g.params.rank

    def test_identity_index(self, sz8_index: GroupIndex):
        assert sz8_index.element_at(sz8_index.identity_index).is_identity()

    def test_generator_table_rows_are_permutations(self, gf8: Field, sz8_index: GroupIndex):
        rng = rng_for(17, "test-table")
        table = sz8_index.generator_table(random_element(gf8, rng), random_element(gf8, rng))
        assert table.shape == (29120, 4)
        for j in range(4):
            assert len(np.unique(table[:, j])) == 29120

    def test_index_only_mode(self, gf32: Field):
        index = enumerate_group(gf32)
        assert not index.has_matrices
        assert index.size == group_order(32)
        with pytest.raises(CapacityError):
            index.lookup(np.eye(4, dtype=np.int64)[None])

    def test_too_large(self):
        with pytest.raises(CapacityError, match="too large"):
            enumerate_group(field_new(7))
