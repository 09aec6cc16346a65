import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panel_logit_moments.exact_linalg import (
    Q,
    RationalMatrix,
    det,
    nullspace,
    rank,
    rat_from_str,
    rat_to_str,
    rref_canonicalize,
)


def mat(rows):
    return RationalMatrix.from_rows([[Q(x) for x in r] for r in rows])


small_matrices = st.integers(1, 5).flatmap(
    lambda n: st.integers(1, 5).flatmap(
        lambda m: st.lists(
            st.lists(st.integers(-9, 9), min_size=m, max_size=m),
            min_size=n,
            max_size=n,
        )
    )
)


class TestRank:
    def test_identity(self):
        assert rank(RationalMatrix.identity(3)) == 3

    def test_proportional_rows(self):
        assert rank(mat([[1, 2], [2, 4]])) == 1

    def test_vandermonde_det_oracle(self):
        # det = prod_{i<j}(x_j - x_i) != 0 at nodes 1..4, so rank must be 4
        v = mat([[x**k for k in range(4)] for x in (1, 2, 3, 4)])
        assert det(v) != 0
        assert rank(v) == 4

    @settings(max_examples=50, deadline=None)
    @given(small_matrices)
    def test_rank_transpose_invariant(self, rows):
        m = mat(rows)
        assert rank(m) == rank(m.transpose())

    @settings(max_examples=50, deadline=None)
    @given(small_matrices)
    def test_rank_nullity(self, rows):
        m = mat(rows)
        assert rank(m) + nullspace(m).cols == m.cols


class TestDet:
    def test_identity(self):
        assert det(RationalMatrix.identity(4)) == 1

    def test_two_by_two(self):
        assert det(mat([[1, 2], [3, 4]])) == -2

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            det(mat([[1, 2, 3]]))

    def test_rational_entries(self):
        m = RationalMatrix.from_rows([[Q(1, 2), Q(1, 3)], [Q(1, 5), Q(1, 7)]])
        assert det(m) == Q(1, 14) - Q(1, 15)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.lists(st.integers(-9, 9), min_size=4, max_size=4), min_size=4, max_size=4)
    )
    def test_det_zero_iff_rank_deficient(self, rows):
        m = mat(rows)
        assert (det(m) != 0) == (rank(m) == 4)


class TestNullspace:
    def test_full_rank_empty_basis(self):
        b = nullspace(RationalMatrix.identity(2))
        assert b.rows == 2 and b.cols == 0

    def test_single_constraint(self):
        b = nullspace(mat([[1, 1]]))
        assert b.cols == 1
        assert b.column(0) == (Q(1), Q(-1))

    def test_row_1234(self):
        m = mat([[1, 2, 3, 4]])
        b = nullspace(m)
        assert b.cols == 3
        assert (m @ b).is_zero()

    @settings(max_examples=50, deadline=None)
    @given(small_matrices)
    def test_annihilation_is_exact(self, rows):
        m = mat(rows)
        assert (m @ nullspace(m)).is_zero()

    @settings(max_examples=30, deadline=None)
    @given(small_matrices)
    def test_nullspace_is_canonical(self, rows):
        b = nullspace(mat(rows))
        if b.cols:
            assert rref_canonicalize(b) == b


class TestCanonicalize:
    def test_idempotent(self):
        b = mat([[1, 0], [0, 1], [2, 3]])
        assert rref_canonicalize(rref_canonicalize(b)) == rref_canonicalize(b)

    def test_column_space_invariant_under_recombination(self):
        b = mat([[1, 2], [3, 4], [5, 6], [7, 9]])
        g = mat([[2, 1], [1, 1]])  # invertible recombination
        assert rref_canonicalize(b) == rref_canonicalize(b @ g)

    def test_unit_pivots(self):
        b = mat([[2, 4], [6, 9], [1, 0], [0, 5], [3, 3], [8, 1]])
        canon = rref_canonicalize(b)
        assert canon.cols == 2
        for j in range(2):
            col = canon.column(j)
            lead = next(i for i, x in enumerate(col) if x != 0)
            assert col[lead] == 1

    def test_drops_dependent_columns(self):
        b = mat([[1, 2], [2, 4]])
        assert rref_canonicalize(b).cols == 1


class TestSerialization:
    def test_rational_round_trip(self):
        assert rat_to_str(Q(-3, 7)) == "-3/7"
        assert rat_from_str("-3/7") == Q(-3, 7)
        assert rat_from_str("5") == Q(5)

    def test_matrix_round_trip(self):
        m = RationalMatrix.from_rows([[Q(1, 2), Q(-3)], [Q(0), Q(7, 11)]])
        assert RationalMatrix.from_json(m.to_json()) == m

    def test_immutability(self):
        m = RationalMatrix.identity(2)
        with pytest.raises(AttributeError):
            m.rows = 5
