"""Exact rational linear algebra.

Dense matrices are numpy object arrays holding :class:`fractions.Fraction`
(or Python ints).  Dense echelon forms use fraction-free (Bareiss)
elimination on an integer-scaled copy, so intermediate entries stay
integral and the only divisions are exact.

Large, very sparse matrices (coboundary operators) go through
:class:`SparseMatrix`, whose rank routine eliminates integer rows one at a
time against an insertion-ordered pivot list.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np


class SingularMatrixError(ArithmeticError):
    pass


def to_fraction(x) -> Fraction:
    """Parse ``3``, ``"3/4"``, ``"-2"``, ``Fraction`` (floats only if exactly representable)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite scalar {x!r}")
        return Fraction(x)
    if isinstance(x, np.integer):
        return Fraction(int(x))
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def frac_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    flat_in = arr.reshape(-1)
    flat_out = out.reshape(-1)
    for i, v in enumerate(flat_in):
        flat_out[i] = to_fraction(v)
    return out


def zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def identity(d: int) -> np.ndarray:
    out = zeros((d, d))
    for i in range(d):
        out[i, i] = Fraction(1)
    return out


def is_zero(a: np.ndarray) -> bool:
    return not any(v != 0 for v in np.asarray(a, dtype=object).reshape(-1))


def to_float(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=object).astype(float)


def is_exact(a) -> bool:
    arr = np.asarray(a, dtype=object).reshape(-1)
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in arr)


# --------------------------------------------------------------------------
# dense elimination


def _integer_rows(A: np.ndarray) -> list[list[int]]:
    """Scale each row by the lcm of its denominators (row space unchanged)."""
    rows = []
    for row in np.asarray(A, dtype=object):
        fr = [to_fraction(v) for v in row]
        lcm = 1
        for v in fr:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        rows.append([int(v * lcm) for v in fr])
    return rows


def _bareiss_echelon(rows: list[list[int]], ncols: int):
    """Fraction-free row echelon form.

    Returns (echelon rows, pivot columns).  Among the candidate pivots of a
    column, the entry of smallest bit length is chosen.
    """
    M = [r[:] for r in rows]
    m = len(M)
    pivots = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r >= m:
            break
        best = None
        for i in range(r, m):
            v = M[i][c]
            if v:
                if best is None or abs(v).bit_length() < abs(M[best][c]).bit_length():
                    best = i
        if best is None:
            continue
        M[r], M[best] = M[best], M[r]
        piv = M[r][c]
        prow = M[r]
        for i in range(r + 1, m):
            row = M[i]
            a = row[c]
            if a:
                M[i] = [(piv * row[j] - a * prow[j]) // prev for j in range(ncols)]
            elif prev != 1 or piv != 1:
                M[i] = [(piv * row[j]) // prev for j in range(ncols)]
        prev = piv
        pivots.append(c)
        r += 1
    return M[:r], pivots


def rref(A: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over Q; returns (R, pivot columns), R has rank rows."""
    A = np.asarray(A, dtype=object)
    if A.ndim != 2:
        raise ValueError("rref expects a matrix")
    m, n = A.shape
    if m == 0 or n == 0:
        return zeros((0, n)), []
    ech, pivots = _bareiss_echelon(_integer_rows(A), n)
    R = [[Fraction(v) for v in row] for row in ech]
    for k in range(len(pivots) - 1, -1, -1):
        c = pivots[k]
        p = R[k][c]
        R[k] = [v / p for v in R[k]]
        for i in range(k):
            a = R[i][c]
            if a:
                R[i] = [x - a * y for x, y in zip(R[i], R[k])]
    out = zeros((len(R), n))
    for i, row in enumerate(R):
        out[i, :] = row
    return out, pivots


def rank(A: np.ndarray) -> int:
    A = np.asarray(A, dtype=object)
    if A.size == 0:
        return 0
    _, pivots = _bareiss_echelon(_integer_rows(A), A.shape[1])
    return len(pivots)


def nullspace(A: np.ndarray) -> np.ndarray:
    """Basis of {x : A x = 0} as the rows of a (k, n) array."""
    A = np.asarray(A, dtype=object)
    n = A.shape[1]
    R, pivots = rref(A)
    free = [j for j in range(n) if j not in set(pivots)]
    basis = zeros((len(free), n))
    for k, f in enumerate(free):
        basis[k, f] = Fraction(1)
        for i, c in enumerate(pivots):
            basis[k, c] = -R[i, f]
    return basis


def row_space(A: np.ndarray) -> np.ndarray:
    R, _ = rref(A)
    return R


def column_space(A: np.ndarray) -> np.ndarray:
    """Basis of the column space of A, as rows."""
    return row_space(np.asarray(A, dtype=object).T)


def span_contains(basis_rows: np.ndarray, vectors: np.ndarray) -> bool:
    basis_rows = np.asarray(basis_rows, dtype=object)
    vectors = np.atleast_2d(np.asarray(vectors, dtype=object))
    if vectors.shape[0] == 0:
        return True
    if basis_rows.shape[0] == 0:
        return is_zero(vectors)
    r = rank(basis_rows)
    return rank(np.vstack([basis_rows, vectors])) == r


def same_span(U: np.ndarray, V: np.ndarray) -> bool:
    return span_contains(U, V) and span_contains(V, U)


def solve(A: np.ndarray, b: np.ndarray):
    """A particular solution of A x = b, or None when inconsistent."""
    A = np.asarray(A, dtype=object)
    b = np.asarray(b, dtype=object).reshape(-1, 1)
    m, n = A.shape
    R, pivots = rref(np.hstack([A, b]))
    if n in pivots:
        return None
    x = zeros(n)
    for i, c in enumerate(pivots):
        x[c] = R[i, n]
    return x


def inverse(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=object)
    d = A.shape[0]
    if A.shape != (d, d):
        raise ValueError("inverse of a non-square matrix")
    if d == 0:
        return zeros((0, 0))
    R, pivots = rref(np.hstack([A, identity(d)]))
    if pivots[:d] != list(range(d)) or len(pivots) < d or any(p >= d for p in pivots[:d]):
        raise SingularMatrixError("matrix is singular")
    return R[:d, d:]


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=object)
    B = np.asarray(B, dtype=object)
    if A.shape[-1] == 0:
        return zeros(A.shape[:-1] + B.shape[1:])
    return A.dot(B)


# --------------------------------------------------------------------------
# sparse matrices


class SparseMatrix:
    """Row-sparse exact matrix: ``rows[i]`` maps column index -> nonzero scalar."""

    __slots__ = ("rows", "ncols")

    def __init__(self, rows, ncols: int):
        self.rows = [dict(r) for r in rows]
        self.ncols = ncols

    @classmethod
    def from_dense(cls, A: np.ndarray) -> "SparseMatrix":
        A = np.asarray(A, dtype=object)
        rows = []
        for row in A:
            rows.append({j: to_fraction(v) for j, v in enumerate(row) if v != 0})
        return cls(rows, A.shape[1])

    @property
    def shape(self):
        return (len(self.rows), self.ncols)

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def to_dense(self) -> np.ndarray:
        out = zeros(self.shape)
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                out[i, j] = v
        return out

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=object).reshape(-1)
        if len(x) != self.ncols:
            raise ValueError("dimension mismatch")
        out = zeros(len(self.rows))
        for i, r in enumerate(self.rows):
            s = 0
            for j, v in r.items():
                xj = x[j]
                if xj:
                    s += v * xj
            out[i] = Fraction(s)
        return out

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != len(other.rows):
            raise ValueError("dimension mismatch")
        out = []
        orows = other.rows
        for r in self.rows:
            acc: dict[int, Fraction] = {}
            for k, v in r.items():
                for j, w in orows[k].items():
                    acc[j] = acc.get(j, 0) + v * w
            out.append({j: v for j, v in acc.items() if v != 0})
        return SparseMatrix(out, other.ncols)

    def transpose(self) -> "SparseMatrix":
        cols: list[dict[int, Fraction]] = [dict() for _ in range(self.ncols)]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                cols[j][i] = v
        return SparseMatrix(cols, len(self.rows))

    def is_zero(self) -> bool:
        return all(not r for r in self.rows)

    def rank(self) -> int:
        return sparse_rank(self.rows, self.ncols)


def _primitive(row: dict) -> dict:
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {j: v // g for j, v in row.items()}
    return row


def _int_row(row: dict) -> dict:
    lcm = 1
    for v in row.values():
        den = v.denominator if isinstance(v, Fraction) else 1
        lcm = lcm * den // math.gcd(lcm, den)
    out = {}
    for j, v in row.items():
        iv = v * lcm
        iv = int(iv) if not isinstance(iv, Fraction) else iv.numerator
        if iv:
            out[j] = iv
    return _primitive(out)


def sparse_echelon(rows, ncols: int):
    """Fraction-free sparse elimination.

    Rows are processed shortest first and reduced against the pivots found
    so far, in insertion order; each stored pivot row is zero in the pivot
    columns of all earlier pivots, so a single ordered pass reduces a row
    completely.  Pivot column: an entry of smallest magnitude, ties broken
    by the least-used column.  Returns the list of (pivot column, row).
    """
    int_rows = [_int_row(r) for r in rows]
    order = sorted(range(len(int_rows)), key=lambda i: (len(int_rows[i]), i))
    pivot_of_col: dict[int, int] = {}
    pivots: list[tuple[int, dict]] = []
    col_load = [0] * ncols
    for i in order:
        row = int_rows[i]
        if not row:
            continue
        if len(pivots) == ncols:
            break
        # reduce in insertion order
        hits = sorted(pivot_of_col[c] for c in row if c in pivot_of_col)
        while hits:
            k = hits[0]
            c, prow = pivots[k]
            a = row.get(c)
            if a:
                p = prow[c]
                g = math.gcd(a, p)
                ma, mp = p // g, a // g
                new = {j: v * ma for j, v in row.items()} if ma != 1 else dict(row)
                for j, v in prow.items():
                    w = new.get(j, 0) - mp * v
                    if w:
                        new[j] = w
                    else:
                        new.pop(j, None)
                row = _primitive(new)
            hits = sorted(pivot_of_col[c2] for c2 in row if c2 in pivot_of_col and pivot_of_col[c2] > k)
        if not row:
            continue
        c = min(row, key=lambda j: (abs(row[j]), col_load[j], j))
        for j in row:
            col_load[j] += 1
        pivot_of_col[c] = len(pivots)
        pivots.append((c, row))
    return pivots


def sparse_rank(rows, ncols: int) -> int:
    return len(sparse_echelon(rows, ncols))
