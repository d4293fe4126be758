import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divfam.errors import BudgetError, ModulusError, ShapeError
from divfam.families import SetFamily
from divfam.constructions import s_family
from divfam.linalg import (
    ModMatrix,
    ModVector,
    count_01_in_span,
    dim_span,
    factorize,
    gf2_rank,
    hadamard,
    is_prime,
    linear_combination,
    membership,
    norm,
    rref,
    span_basis,
)

from . import oracles

FIG1_ROWS = [
    [1, 0, 0, 0, 0, 2, 0, 0, 0, 2, 0, 1],
    [0, 1, 0, 0, 2, 1, 0, 2, 1, 0, 2, 2],
    [0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1],
    [0, 0, 0, 1, 0, 0, 1, 0, 1, 0, 0, 2],
]


@st.composite
def matrices(draw, primes=(2, 3, 5, 7), max_rows=6, max_cols=8):
    p = draw(st.sampled_from(primes))
    ncols = draw(st.integers(1, max_cols))
    nrows = draw(st.integers(0, max_rows))
    rows = [draw(st.lists(st.integers(0, p - 1), min_size=ncols, max_size=ncols)) for _ in range(nrows)]
    return p, ncols, rows


def vec(entries, m):
    return ModVector(m, tuple(entries))


class TestModVector:
    def test_entries_must_be_residues(self):
        with pytest.raises(ValueError):
            ModVector(3, (0, 3))
        with pytest.raises(ModulusError):
            ModVector(1, (0,))

    def test_of_reduces(self):
        assert ModVector.of([5, -1, 3], 3).entries == (2, 2, 0)

    def test_arithmetic(self):
        u, w = vec((1, 2, 0), 3), vec((2, 2, 1), 3)
        assert (u + w).entries == (0, 1, 1)
        assert (u - w).entries == (2, 0, 2)
        assert (-u).entries == (2, 1, 0)
        assert (2 * u).entries == (2, 1, 0)
        assert (u * w).entries == (2, 1, 0)

    def test_mismatch_is_shape_error(self):
        with pytest.raises(ShapeError):
            vec((1, 0), 2) + vec((1, 0), 3)
        with pytest.raises(ShapeError):
            hadamard(vec((1, 0), 2), vec((1, 0, 1), 2))

    def test_support_and_restrict(self):
        v = vec((0, 2, 0, 1), 3)
        assert v.support() == (1, 3)
        assert v.restrict([1, 2]).entries == (2, 0)
        assert str(v) == "0201"


class TestHadamardNorm:
    def test_intersection(self):
        assert hadamard(vec((1, 0, 1), 2), vec((1, 1, 0), 2)).entries == (1, 0, 0)

    def test_identity(self):
        v = vec((2, 0, 1, 1), 3)
        assert hadamard(v, ModVector.ones(4, 3)) == v

    def test_mod3_example(self):
        assert hadamard(vec((2, 1), 3), vec((2, 2), 3)).entries == (1, 2)

    def test_norm_examples(self):
        assert norm(ModVector.zeros(5, 7)) == 0
        assert norm(ModVector.ones(6, 3)) == 0
        assert norm(vec((1, 2, 2), 3)) == 2

    @given(
        st.sampled_from([2, 3, 4, 6, 8, 9, 12]),
        st.integers(1, 8),
        st.data(),
    )
    def test_bilinearity_and_norm_linearity(self, m, n, data):
        draw_vec = lambda: vec(data.draw(st.lists(st.integers(0, m - 1), min_size=n, max_size=n)), m)
        u, w, x = draw_vec(), draw_vec(), draw_vec()
        a, b = data.draw(st.integers(0, m - 1)), data.draw(st.integers(0, m - 1))
        assert hadamard(a * u + b * w, x) == a * hadamard(u, x) + b * hadamard(w, x)
        assert hadamard(u, w) == hadamard(w, u)
        assert norm(a * u + b * w) == (a * norm(u) + b * norm(w)) % m

    def test_linear_combination(self):
        vs = [vec((1, 0, 2), 3), vec((0, 1, 1), 3)]
        assert linear_combination([2, 1], vs, 3, 3).entries == (2, 1, 2)
        with pytest.raises(ShapeError):
            linear_combination([1], vs, 3, 3)


class TestNumberTheory:
    def test_is_prime(self):
        assert [m for m in range(30) if is_prime(m)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]

    @given(st.integers(2, 5000))
    def test_factorize_matches_oracle(self, m):
        assert factorize(m) == oracles.factor(m)


class TestRref:
    def test_small_gf2(self):
        B = rref(ModMatrix.from_lists([[1, 1, 0], [0, 1, 1], [1, 0, 1]], 2))
        assert B.dimension == 2
        assert B.pivot_columns == (0, 1)
        assert [v.entries for v in B.vectors] == [(1, 0, 1), (0, 1, 1)]

    def test_zero_matrix(self):
        B = rref(ModMatrix.from_lists([[0, 0, 0], [0, 0, 0]], 5))
        assert B.dimension == 0 and B.pivot_columns == ()

    def test_figure_matrix(self):
        B = rref(ModMatrix.from_lists(FIG1_ROWS, 3))
        assert B.dimension == 4
        assert B.pivot_columns == (0, 1, 2, 3)
        assert [list(v.entries) for v in B.vectors] == FIG1_ROWS

    def test_composite_rejected(self):
        with pytest.raises(ModulusError):
            rref(ModMatrix.from_lists([[1, 2]], 6))

    @given(matrices())
    def test_matches_textbook_elimination(self, m):
        p, ncols, rows = m
        B = rref(ModMatrix.from_lists(rows, p, ncols))
        want_rows, want_piv = oracles.rref_by_hand(rows, p)
        assert [v.entries for v in B.vectors] == want_rows
        assert list(B.pivot_columns) == want_piv

    @given(matrices())
    def test_idempotent(self, m):
        p, ncols, rows = m
        B = rref(ModMatrix.from_lists(rows, p, ncols))
        again = rref(B.rows)
        assert again == B

    @given(matrices())
    def test_rref_shape(self, m):
        p, ncols, rows = m
        B = rref(ModMatrix.from_lists(rows, p, ncols))
        for i, c in enumerate(B.pivot_columns):
            assert B.vectors[i].entries[c] == 1
            assert all(B.vectors[j].entries[c] == 0 for j in range(B.dimension) if j != i)
        assert list(B.pivot_columns) == sorted(set(B.pivot_columns))

    @settings(max_examples=60)
    @given(matrices(max_rows=5, max_cols=6))
    def test_dim_matches_enumeration(self, m):
        p, ncols, rows = m
        assert dim_span([vec(r, p) for r in rows], p) == oracles.dim_by_enumeration(rows, p, ncols)


class TestDimSpan:
    def test_empty(self):
        assert dim_span([], 2) == 0

    def test_s62(self):
        F = s_family(6, 2)
        assert dim_span(F.vectors(2), 2) == 3
        assert oracles.dim_by_enumeration([v.entries for v in F.vectors(2)], 2, 6) == 3

    def test_scalar_multiples(self):
        assert dim_span([vec((1, 1), 3), vec((2, 2), 3)], 3) == 1

    def test_gf2_rank_packed(self):
        assert gf2_rank([0b011, 0b110, 0b101]) == 2
        assert gf2_rank([]) == 0


class TestMembership:
    def test_zero_vector(self):
        B = span_basis([vec((1, 2, 0), 3), vec((0, 1, 1), 3)], 3)
        assert membership(ModVector.zeros(3, 3), B) == (0, 0)

    def test_basis_row_is_unit(self):
        B = span_basis([vec((1, 2, 0), 3), vec((0, 1, 1), 3)], 3)
        for i, row in enumerate(B.vectors):
            coeffs = membership(row, B)
            assert coeffs == tuple(1 if j == i else 0 for j in range(B.dimension))

    def test_figure2_coefficients(self):
        # w_1..w_3 are the first three rows of the restricted matrix; 1_{c2} is column two
        w = [vec(r, 3) for r in [(0, 1, 1), (1, 1, 2), (2, 0, 1)]]
        B = rref(ModMatrix(3, 3, tuple(w)))
        coeffs_rref = membership(vec((0, 1, 0), 3), B)
        assert coeffs_rref is not None
        combo = linear_combination([0, 1, 1], w, 3, 3)
        assert combo.entries == (0, 1, 0)

    def test_outside_span(self):
        B = span_basis([vec((1, 1, 0), 2)], 2)
        assert membership(vec((1, 0, 0), 2), B) is None

    def test_shape_mismatch(self):
        B = span_basis([vec((1, 1, 0), 2)], 2)
        with pytest.raises(ShapeError):
            membership(vec((1, 1), 2), B)
        with pytest.raises(ShapeError):
            membership(vec((1, 1, 0), 3), B)

    @given(matrices(), st.data())
    def test_rank_membership_consistency(self, m, data):
        p, ncols, rows = m
        v = vec(data.draw(st.lists(st.integers(0, p - 1), min_size=ncols, max_size=ncols)), p)
        vs = [vec(r, p) for r in rows]
        B = span_basis(vs, p, ncols)
        coeffs = membership(v, B)
        same_dim = dim_span(vs + [v], p) == dim_span(vs, p)
        assert (coeffs is not None) == same_dim
        if coeffs is not None:
            assert linear_combination(list(coeffs), list(B.vectors), ncols, p) == v


class TestCount01:
    def test_examples(self):
        assert count_01_in_span(span_basis([vec((1, 1, 0), 2), vec((0, 1, 1), 2)], 2)) == 4
        assert count_01_in_span(span_basis([], 3, 4)) == 1
        assert count_01_in_span(span_basis(s_family(4, 2).vectors(2), 2)) == 4

    def test_budget(self):
        B = span_basis([ModVector.indicator(12, [i], 5) for i in range(9)], 5)
        with pytest.raises(BudgetError):
            count_01_in_span(B, budget=1000)

    @settings(max_examples=60)
    @given(matrices(primes=(2, 3, 5), max_rows=5, max_cols=7))
    def test_matches_enumeration_and_bound(self, m):
        p, ncols, rows = m
        B = span_basis([vec(r, p) for r in rows], p, ncols)
        got = count_01_in_span(B)
        assert got == oracles.count_01(rows, p, ncols)
        assert got <= 2**B.dimension


def test_exhaustive_gf2_rank_small():
    # every set of up to three vectors in F_2^3
    vectors = list(itertools.product((0, 1), repeat=3))
    for r in range(4):
        for combo in itertools.combinations(vectors, r):
            assert dim_span([vec(v, 2) for v in combo], 2) == oracles.dim_by_enumeration(combo, 2, 3)
