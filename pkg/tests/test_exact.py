from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from cochain_lab import exact

small = st.integers(-4, 4)


def rational_matrix(rows, cols):
    entry = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))
    return st.lists(st.lists(entry, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def sympy_rank(A):
    return sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in A]).rank()


@given(st.integers(1, 6).flatmap(lambda r: st.integers(1, 6).flatmap(lambda c: rational_matrix(r, c))))
def test_rank_matches_sympy(rows):
    A = exact.frac_array(rows)
    assert exact.rank(A) == sympy_rank(rows)


@given(st.integers(1, 6).flatmap(lambda r: st.integers(1, 6).flatmap(lambda c: rational_matrix(r, c))))
def test_nullspace_is_kernel_of_right_dimension(rows):
    A = exact.frac_array(rows)
    N = exact.nullspace(A)
    assert N.shape[0] == A.shape[1] - sympy_rank(rows)
    for v in N:
        assert exact.is_zero(exact.matmul(A, v))
    if N.shape[0]:
        assert exact.rank(N) == N.shape[0]


@given(st.integers(1, 5).flatmap(lambda r: st.integers(1, 5).flatmap(lambda c: rational_matrix(r, c))))
def test_sparse_rank_matches_dense(rows):
    A = exact.frac_array(rows)
    S = exact.SparseMatrix.from_dense(A)
    assert S.rank() == exact.rank(A)
    assert np.array_equal(S.to_dense(), A)
    assert np.array_equal(S.transpose().to_dense(), A.T)


@given(st.integers(1, 5).flatmap(lambda n: rational_matrix(n, n)))
def test_inverse_or_singular(rows):
    A = exact.frac_array(rows)
    if sympy_rank(rows) < A.shape[0]:
        with pytest.raises(exact.SingularMatrixError):
            exact.inverse(A)
    else:
        assert np.array_equal(exact.matmul(A, exact.inverse(A)), exact.identity(A.shape[0]))


@given(rational_matrix(4, 3), st.lists(small, min_size=3, max_size=3))
def test_solve_consistent_system(rows, x):
    A = exact.frac_array(rows)
    b = exact.matmul(A, exact.frac_array(x))
    sol = exact.solve(A, b)
    assert sol is not None and np.array_equal(exact.matmul(A, sol), b)


def test_solve_inconsistent():
    A = exact.frac_array([[1, 1], [2, 2]])
    assert exact.solve(A, exact.frac_array([1, 3])) is None


def test_sparse_matmul_matches_dense(rng):
    A = exact.frac_array(rng.integers(-2, 3, size=(5, 4)))
    B = exact.frac_array(rng.integers(-2, 3, size=(4, 3)))
    P = exact.SparseMatrix.from_dense(A).matmul(exact.SparseMatrix.from_dense(B))
    assert np.array_equal(P.to_dense(), exact.matmul(A, B))
    x = exact.frac_array([1, Fraction(1, 2), -3, 0])
    assert np.array_equal(exact.SparseMatrix.from_dense(A).matvec(x), exact.matmul(A, x))


def test_sparse_rank_large_structured():
    # incidence matrix of a cycle of length 50: rank 49
    n = 50
    rows = [{i: 1, (i + 1) % n: -1} for i in range(n)]
    assert exact.sparse_rank(rows, n) == n - 1


def test_to_fraction_parsing():
    assert exact.to_fraction("3/4") == Fraction(3, 4)
    assert exact.to_fraction(" -2 ") == -2
    assert exact.to_fraction(0.5) == Fraction(1, 2)
    with pytest.raises(ValueError):
        exact.to_fraction(float("inf"))
    with pytest.raises(TypeError):
        exact.to_fraction(True)


def test_same_span_and_column_space():
    A = exact.frac_array([[1, 2], [2, 4], [0, 0]])
    C = exact.column_space(A)
    assert C.shape[0] == 1
    assert exact.same_span(C, exact.frac_array([[1, 2, 0]]))
    assert not exact.span_contains(C, exact.frac_array([[0, 0, 1]]))
