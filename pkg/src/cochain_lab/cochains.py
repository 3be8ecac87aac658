"""The bar cochain complex C^n(G, X) of a finite group.

Cochain values are stored densely with shape ``(N,)*n + (d,)``; flattening
is C order, so the flat index of ``(g1, ..., gn, k)`` is
``((g1*N + g2)*N + ... + gn)*d + k`` (leftmost group index slowest).

Coboundary, with x a 0-cochain and phi an n-cochain::

    (d x)(g)          = x - pi(g) x
    (d phi)(g1..gn+1) = -pi(g1) phi(g2..gn+1) + (-1)^n phi(g1..gn)
                        - sum_{i=1..n} (-1)^i phi(.., g_i g_{i+1}, ..)
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .algebra import AlgebraError, GroupAlgebraElement, classify, convolve
from .groups import Subgroup
from .modules import BanachModule

DEGREE_CAP = 3
FLAT_CAP = 2_000_000
FLOAT_RANK_TOL = 1e-9


class CapError(ValueError):
    def __init__(self, msg, cap=None):
        super().__init__(msg)
        self.cap = cap


def check_size(M: BanachModule, n: int, flat_cap: int = FLAT_CAP):
    size = M.group.size ** n * M.dim
    if size > flat_cap:
        raise CapError(f"C^{n} has {size} coordinates, above the cap {flat_cap}", flat_cap)
    return size


class Cochain:
    """An n-cochain with values in a module; ``values`` has shape (N,)*n + (d,)."""

    def __init__(self, module: BanachModule, degree: int, values):
        self.module = module
        self.degree = degree
        vals = np.asarray(values)
        shape = (module.group.size,) * degree + (module.dim,)
        if vals.shape != shape:
            raise ValueError(f"values have shape {vals.shape}, expected {shape}")
        self.values = vals

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    def __repr__(self):
        return f"<Cochain degree {self.degree} over {self.module!r}>"

    def __call__(self, *gs) -> np.ndarray:
        if len(gs) != self.degree:
            raise ValueError(f"expected {self.degree} arguments")
        return self.values[tuple(gs)]

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    @classmethod
    def from_flat(cls, module, degree, vec) -> "Cochain":
        shape = (module.group.size,) * degree + (module.dim,)
        return cls(module, degree, np.asarray(vec).reshape(shape))

    @classmethod
    def zero(cls, module, degree, exact_mode: bool = True) -> "Cochain":
        shape = (module.group.size,) * degree + (module.dim,)
        return cls(module, degree, exact.zeros(shape) if exact_mode else np.zeros(shape))

    @classmethod
    def random(cls, module, degree, rng, bound: int = 3, denominators=(1, 2, 3)) -> "Cochain":
        """Random rational cochain with small numerators and denominators."""
        shape = (module.group.size,) * degree + (module.dim,)
        size = int(np.prod(shape))
        nums = rng.integers(-bound, bound + 1, size=size)
        dens = rng.choice(np.asarray(denominators), size=size)
        vals = np.array([Fraction(int(a), int(b)) for a, b in zip(nums, dens)], dtype=object)
        return cls(module, degree, vals.reshape(shape))

    def _same(self, other):
        if other.module is not self.module or other.degree != self.degree:
            raise ValueError("cochains of different modules or degrees")

    def __add__(self, other):
        self._same(other)
        return Cochain(self.module, self.degree, self.values + other.values)

    def __sub__(self, other):
        self._same(other)
        return Cochain(self.module, self.degree, self.values - other.values)

    def __neg__(self):
        return Cochain(self.module, self.degree, -self.values)

    def __mul__(self, t):
        if self.exact:
            t = exact.to_fraction(t)
        return Cochain(self.module, self.degree, self.values * t)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return (other.module is self.module and other.degree == self.degree
                and np.array_equal(self.values, other.values))

    def is_zero(self) -> bool:
        return not np.any(self.values != 0)

    def postcompose(self, A) -> "Cochain":
        """x -> A x applied to every value."""
        A = np.asarray(A)
        d = self.module.dim
        flat = self.values.reshape(-1, d)
        out = flat.dot(A.T) if d else flat
        return Cochain(self.module, self.degree, out.reshape(self.values.shape))

    def to_json(self) -> dict:
        N = self.module.group.size
        vals = {}
        for idx in np.ndindex(*((N,) * self.degree)):
            key = ",".join(str(i) for i in idx)
            vals[key] = [exact.fraction_str(Fraction(v)) if self.exact else float(v) for v in self.values[idx]]
        return {"degree": self.degree, "values": vals}

    @classmethod
    def from_json(cls, module, data) -> "Cochain":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["degree"])
        out = cls.zero(module, n)
        for key, vec in data["values"].items():
            idx = tuple(int(s) for s in key.split(",")) if key else ()
            out.values[idx] = exact.frac_array(vec)
        return out


# --------------------------------------------------------------------------
# coboundary


def _tensor_dtype(v):
    return object if v.dtype == object else float


def apply_coboundary(phi: Cochain, flat_cap: int = FLAT_CAP) -> Cochain:
    """Direct evaluation of the alternating-sum formula."""
    M = phi.module
    G = M.group
    n = phi.degree
    N, d = G.size, M.dim
    check_size(M, n + 1, flat_cap)
    V = phi.values
    mats = M.matrices if phi.exact else M.float_matrices()
    out_shape = (N,) * (n + 1) + (d,)
    out = exact.zeros(out_shape) if phi.exact else np.zeros(out_shape)
    # -pi(g1) phi(g2..gn+1)
    flatV = V.reshape(-1, d)
    for g in range(N):
        out[g] = -(flatV.dot(mats[g].T)).reshape(V.shape) if d else out[g]
    if n == 0:
        return Cochain(M, 1, out + V[None, :])
    # (-1)^n phi(g1..gn), constant in g_{n+1}
    sign = 1 if n % 2 == 0 else -1
    out = out + sign * V[..., None, :]
    idx = np.indices((N,) * (n + 1), sparse=True)
    idx = [i.reshape(i.shape) for i in idx]
    mul = G.mul
    for i in range(1, n + 1):
        merged = mul[idx[i - 1], idx[i]]
        args = tuple(idx[:i - 1]) + (merged,) + tuple(idx[i + 1:])
        term = V[args]
        if i % 2 == 0:
            out = out - term
        else:
            out = out + term
    return Cochain(M, n + 1, out)


@dataclass
class CoboundaryMatrix:
    """Matrix of d: C^n -> C^{n+1} on flat coordinates."""

    degree: int
    matrix: exact.SparseMatrix
    group_size: int
    dim: int

    @property
    def shape(self):
        return self.matrix.shape

    def row_index(self, gs, k) -> int:
        return int(np.ravel_multi_index(tuple(gs) + (k,), (self.group_size,) * (self.degree + 1) + (self.dim,)))

    def col_index(self, gs, k) -> int:
        return int(np.ravel_multi_index(tuple(gs) + (k,), (self.group_size,) * self.degree + (self.dim,)))

    def row_tuple(self, r: int):
        idx = np.unravel_index(r, (self.group_size,) * (self.degree + 1) + (self.dim,))
        return tuple(int(i) for i in idx[:-1]), int(idx[-1])

    def apply(self, phi: Cochain) -> Cochain:
        vec = self.matrix.matvec(phi.flat())
        return Cochain.from_flat(phi.module, self.degree + 1, vec)


def coboundary_matrix(M: BanachModule, n: int, flat_cap: int = FLAT_CAP) -> CoboundaryMatrix:
    """Sparse assembly of d: C^n -> C^{n+1}."""
    G = M.group
    N, d = G.size, M.dim
    check_size(M, n + 1, flat_cap)
    ncols = N ** n * d
    tuples = np.indices((N,) * (n + 1)).reshape(n + 1, -1)
    # column base of (g2..gn+1), of (g1..gn), and of each merged tuple
    def base(cols):
        if not cols:
            return np.zeros(tuples.shape[1], dtype=np.int64)
        return np.ravel_multi_index(tuple(cols), (N,) * len(cols)) * d

    tail = base([tuples[j] for j in range(1, n + 1)])
    head = base([tuples[j] for j in range(n)]) if n else None
    merged = []
    for i in range(1, n + 1):
        cols = [tuples[j] for j in range(i - 1)] + [G.mul[tuples[i - 1], tuples[i]]] + \
               [tuples[j] for j in range(i + 1, n + 1)]
        merged.append((i, base(cols)))
    pi_rows = [[{j: -M.matrices[g][k, j] for j in range(d) if M.matrices[g][k, j] != 0}
                for k in range(d)] for g in range(N)]
    one = Fraction(1)
    sign_n = one if n % 2 == 0 else -one
    rows = []
    g1s = tuples[0]
    for t in range(tuples.shape[1]):
        g1 = int(g1s[t])
        tb = int(tail[t])
        for k in range(d):
            row = {tb + j: v for j, v in pi_rows[g1][k].items()}
            if n == 0:
                c = k
                row[c] = row.get(c, 0) + one
            else:
                c = int(head[t]) + k
                row[c] = row.get(c, 0) + sign_n
                for i, mb in merged:
                    c = int(mb[t]) + k
                    row[c] = row.get(c, 0) + (-one if i % 2 == 0 else one)
            rows.append({j: v for j, v in row.items() if v != 0})
    return CoboundaryMatrix(n, exact.SparseMatrix(rows, ncols), N, d)


# --------------------------------------------------------------------------
# cohomology


@dataclass
class CohomologyReport:
    degree: int
    dim_C: int
    dim_Z: int
    dim_B: int
    dim_H: int
    basis_Z: np.ndarray | None = None
    basis_B: np.ndarray | None = None
    mode: str = "exact"


def _float_rank(S: exact.SparseMatrix) -> int:
    if S.shape[0] == 0 or S.shape[1] == 0:
        return 0
    A = S.to_dense().astype(float)
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > FLOAT_RANK_TOL * s[0]))


def _matrix_rank(S: exact.SparseMatrix, mode: str) -> int:
    if S.shape[0] == 0 or S.shape[1] == 0:
        return 0
    if mode == "float":
        return _float_rank(S)
    return S.rank()


def cohomology(M: BanachModule, n: int, mode: str = "exact", with_bases: bool = False,
               degree_cap: int = DEGREE_CAP, flat_cap: int = FLAT_CAP) -> CohomologyReport:
    """dim Z^n = dim C^n - rank d^{n+1}, dim B^n = rank d^n (B^0 = 0)."""
    if n < 0 or n > degree_cap:
        raise CapError(f"degree {n} outside 0..{degree_cap}", degree_cap)
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    dim_C = check_size(M, n, flat_cap)
    nxt = coboundary_matrix(M, n, flat_cap)
    prev = coboundary_matrix(M, n - 1, flat_cap) if n >= 1 else None
    basis_Z = basis_B = None
    if with_bases:
        if mode != "exact":
            raise ValueError("bases are only produced in exact mode")
        basis_Z = exact.nullspace(nxt.matrix.to_dense()) if dim_C else exact.zeros((0, 0))
        basis_B = (exact.column_space(prev.matrix.to_dense()) if prev is not None and prev.shape[1]
                   else exact.zeros((0, dim_C)))
        rank_next = dim_C - basis_Z.shape[0]
        rank_prev = basis_B.shape[0]
        # B inside Z
        for b in basis_B:
            if not exact.is_zero(nxt.matrix.matvec(b)):
                raise AssertionError("coboundary is not a cocycle")
    else:
        rank_next = _matrix_rank(nxt.matrix, mode)
        rank_prev = _matrix_rank(prev.matrix, mode) if prev is not None else 0
    dim_Z = dim_C - rank_next
    dim_B = rank_prev
    if dim_B > dim_Z:
        raise AssertionError("dim B exceeds dim Z")
    return CohomologyReport(n, dim_C, dim_Z, dim_B, dim_Z - dim_B, basis_Z, basis_B, mode)


def in_coboundaries(M: BanachModule, phi: Cochain):
    """Exact primitive psi with d psi = phi, or None."""
    n = phi.degree
    if n == 0:
        return None if not phi.is_zero() else Cochain.zero(M, 0)
    D = coboundary_matrix(M, n - 1).matrix.to_dense()
    sol = exact.solve(D, phi.flat())
    return None if sol is None else Cochain.from_flat(M, n - 1, sol)


def is_cocycle(phi: Cochain) -> bool:
    return apply_coboundary(phi).is_zero()


# --------------------------------------------------------------------------
# extensions to the affine space of the group algebra


def _contract(values: np.ndarray, xis) -> np.ndarray:
    out = values
    for xi in xis:
        v = xi.vector()
        if out.dtype == object or v.dtype == object:
            out = np.tensordot(np.asarray(v, dtype=object), np.asarray(out, dtype=object), axes=(0, 0))
        else:
            out = np.tensordot(v, out, axes=(0, 0))
    return out


def multiaffine_eval(phi: Cochain, *xis: GroupAlgebraElement) -> np.ndarray:
    """phi-hat(xi_1, .., xi_n) for xi_i of augmentation 1."""
    if len(xis) != phi.degree:
        raise ValueError(f"degree {phi.degree} cochain needs {phi.degree} arguments")
    for xi in xis:
        if xi.group is not phi.module.group:
            raise AlgebraError("algebra element over a different group")
        if not classify(xi).in_affine_space:
            raise AlgebraError("multiaffine extension needs augmentation 1")
    return _contract(phi.values, xis)


def multilinear_eval(phi: Cochain, *xis: GroupAlgebraElement) -> np.ndarray:
    """The linear extension; agrees with the affine one only on augmentation 1."""
    if len(xis) != phi.degree:
        raise ValueError(f"degree {phi.degree} cochain needs {phi.degree} arguments")
    return _contract(phi.values, xis)


def _coboundary_formula(phi: Cochain, xis, evaluate) -> np.ndarray:
    from .modules import apply_algebra

    M = phi.module
    n = phi.degree
    if len(xis) != n + 1:
        raise ValueError("need n+1 arguments")
    out = -exact.matmul(apply_algebra(M, xis[0]), evaluate(phi, *xis[1:]))
    out = out + (1 if n % 2 == 0 else -1) * evaluate(phi, *xis[:n])
    for i in range(1, n + 1):
        args = list(xis[:i - 1]) + [convolve(xis[i - 1], xis[i])] + list(xis[i + 1:])
        term = evaluate(phi, *args)
        out = out - term if i % 2 == 0 else out + term
    return out


def extended_coboundary(phi: Cochain, *xis: GroupAlgebraElement) -> np.ndarray:
    """The coboundary formula with group arguments replaced by affine ones, applied to phi-hat."""
    return _coboundary_formula(phi, xis, multiaffine_eval)


def linear_extended_coboundary(phi: Cochain, *xis: GroupAlgebraElement) -> np.ndarray:
    """Same formula applied to the linear extension (degree 0: the constant x)."""
    return _coboundary_formula(phi, xis, multilinear_eval)


# --------------------------------------------------------------------------
# restriction


def restriction(phi: Cochain, F: Subgroup) -> Cochain:
    M = phi.module
    MF = M.restrict(F)
    if MF is M:
        return phi
    els = np.asarray(F.elements)
    n = phi.degree
    if n == 0:
        return Cochain(MF, 0, phi.values)
    grids = np.ix_(*([els] * n))
    return Cochain(MF, n, phi.values[grids])


def random_cocycle(M: BanachModule, n: int, rng, basis_Z=None) -> Cochain:
    """Random rational combination of an exact cocycle basis."""
    if basis_Z is None:
        basis_Z = cohomology(M, n, with_bases=True).basis_Z
    if basis_Z.shape[0] == 0:
        return Cochain.zero(M, n)
    coeffs = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-3, 4, size=basis_Z.shape[0]),
                                                      rng.integers(1, 4, size=basis_Z.shape[0]))]
    vec = exact.matmul(np.array(coeffs, dtype=object), basis_Z)
    return Cochain.from_flat(M, n, vec)
