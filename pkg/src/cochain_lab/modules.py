"""Finite-dimensional isometric Banach G-modules.

A module is a group, exact d x d matrices for every element, and a norm
exponent p.  Submodules keep an ``embedding`` into the ambient coordinate
space, so the norm of a coordinate vector c is ``||E c||_p``; this lets a
rotation-type piece such as the augmentation part of a regular
representation be used with its honest restricted norm.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize

from . import exact
from .algebra import GroupAlgebraElement, uniform_average
from .groups import FiniteGroup, Subgroup

INF = math.inf


class ModuleError(ValueError):
    pass


class StrictConvexityWarning(UserWarning):
    pass


def parse_p(p):
    if isinstance(p, str) and p.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    if isinstance(p, float) and math.isinf(p):
        return INF
    q = exact.to_fraction(p)
    if q < 1:
        raise ModuleError(f"norm exponent must be >= 1, got {p}")
    return q


def p_str(p) -> str:
    return "inf" if p == INF else exact.fraction_str(p)


def strictly_convex(p) -> bool:
    return p != INF and p > 1


def lp_norm(v, p) -> float:
    v = np.abs(np.asarray(v, dtype=float).reshape(-1))
    if v.size == 0:
        return 0.0
    if p == INF:
        return float(v.max())
    p = float(p)
    if p == 1.0:
        return float(v.sum())
    m = v.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((v / m) ** p) ** (1.0 / p))


def _is_signed_permutation(A: np.ndarray) -> bool:
    for axis in (0, 1):
        nz = np.array([[v != 0 for v in row] for row in A])
        if not np.all(nz.sum(axis=axis) == 1):
            return False
    return all(v in (0, 1, -1) for v in A.reshape(-1))


def _perm_matrix(images) -> np.ndarray:
    d = len(images)
    A = exact.zeros((d, d))
    for i, j in enumerate(images):
        A[int(j), i] = Fraction(1)
    return A


class BanachModule:
    """(X, pi) with X = R^d carrying the l^p norm pulled back along ``embedding``."""

    def __init__(self, group: FiniteGroup, matrices, p=2, embedding=None, ambient=None,
                 name: str = "", check: bool = True):
        self.group = group
        mats = np.asarray(matrices, dtype=object)
        if mats.ndim != 3 or mats.shape[0] != group.size or mats.shape[1] != mats.shape[2]:
            raise ModuleError("need one square matrix per group element")
        self.matrices = exact.frac_array(mats) if mats.size else mats
        self.p = parse_p(p)
        self.embedding = None if embedding is None else exact.frac_array(embedding)
        self.ambient = ambient
        self.name = name
        self._restrictions: dict = {}
        self._float = None
        if check:
            self._check_homomorphism()
            self._check_isometry()

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __repr__(self):
        return f"<BanachModule {self.name or ''} d={self.dim} p={p_str(self.p)} over {self.group!r}>"

    def matrix(self, g: int) -> np.ndarray:
        return self.matrices[g]

    def float_matrices(self) -> np.ndarray:
        if self._float is None:
            self._float = self.matrices.astype(float)
        return self._float

    def act(self, g: int, x) -> np.ndarray:
        return exact.matmul(self.matrices[g], np.asarray(x, dtype=object))

    # -- validation --------------------------------------------------------

    def _check_homomorphism(self):
        G = self.group
        if not np.array_equal(self.matrices[G.identity], exact.identity(self.dim)):
            raise ModuleError("identity element does not act as the identity matrix")
        for g in G.elements:
            Ag = self.matrices[g]
            for f in G.elements:
                if not np.array_equal(exact.matmul(Ag, self.matrices[f]), self.matrices[G.mul[g, f]]):
                    raise ModuleError(f"matrices are not a homomorphism at ({g}, {f})")

    def _check_isometry(self):
        if self.dim == 0:
            return
        if self.p == 2:
            gram = self.gram()
            for g in self.group.elements:
                A = self.matrices[g]
                if not np.array_equal(exact.matmul(exact.matmul(A.T, gram), A), gram):
                    raise ModuleError(f"matrix of element {g} is not an isometry for p=2")
            return
        if self.embedding is None:
            for g in self.group.elements:
                if not _is_signed_permutation(self.matrices[g]):
                    raise ModuleError(
                        f"matrix of element {g} is not a signed permutation (required for p={p_str(self.p)})")
            return
        if self.ambient is None:
            raise ModuleError("embedded module with p != 2 needs an ambient module")
        E = self.embedding
        for g in self.group.elements:
            if not np.array_equal(exact.matmul(self.ambient.ambient_matrix(g), E),
                                  exact.matmul(E, self.matrices[g])):
                raise ModuleError("embedding is not equivariant")

    def ambient_matrix(self, g: int) -> np.ndarray:
        """Matrix of g in the coordinates where the norm is plain l^p."""
        if self.embedding is None:
            return self.matrices[g]
        return self.ambient.ambient_matrix(g)

    def gram(self) -> np.ndarray:
        if self.embedding is None:
            return exact.identity(self.dim)
        E = self.embedding
        return exact.matmul(E.T, E)

    # -- norms -------------------------------------------------------------

    def ambient_coords(self, x) -> np.ndarray:
        x = np.asarray(x)
        if self.embedding is None:
            return x
        if x.dtype == object:
            return exact.matmul(self.embedding, x)
        return self.embedding.astype(float) @ x

    def norm(self, x) -> float:
        return lp_norm(np.asarray(self.ambient_coords(x), dtype=object).astype(float), self.p)

    def norm_sq_exact(self, x) -> Fraction:
        """Exact ||x||^2 for p = 2 and rational x."""
        if self.p != 2:
            raise ModuleError("exact squared norms need p = 2")
        y = self.ambient_coords(np.asarray(x, dtype=object))
        return sum((Fraction(v) * Fraction(v) for v in y), Fraction(0))

    # -- derived modules ---------------------------------------------------

    def restrict(self, F: Subgroup) -> "BanachModule":
        """The same matrices viewed as a module over F (reindexed to F.as_group())."""
        if F.parent is not self.group:
            raise ModuleError("subgroup of a different group")
        key = F.elements
        if key not in self._restrictions:
            if len(F) == self.group.size:
                self._restrictions[key] = self
            else:
                H = F.as_group()
                mats = self.matrices[list(F.elements)]
                amb = self.ambient.restrict(Subgroup(self.ambient.group, F.elements)) if self.ambient else None
                self._restrictions[key] = BanachModule(H, mats, self.p, self.embedding, amb,
                                                       name=f"{self.name}|F", check=False)
        return self._restrictions[key]

    def submodule(self, basis_rows, name: str = "") -> "BanachModule":
        """Invariant subspace spanned by ``basis_rows`` with the restricted norm."""
        B = np.asarray(basis_rows, dtype=object).T
        if B.shape[1] == 0:
            return BanachModule(self.group, np.empty((self.group.size, 0, 0), dtype=object), self.p,
                                embedding=exact.zeros((self.dim, 0)), ambient=self, name=name, check=False)
        BtB_inv = exact.inverse(exact.matmul(B.T, B))
        left = exact.matmul(BtB_inv, B.T)
        mats = []
        for g in self.group.elements:
            AB = exact.matmul(self.matrices[g], B)
            X = exact.matmul(left, AB)
            if not np.array_equal(exact.matmul(B, X), AB):
                raise ModuleError("subspace is not invariant")
            mats.append(X)
        E = B if self.embedding is None else exact.matmul(self.embedding, B)
        amb = self if self.embedding is None else self.ambient
        return BanachModule(self.group, np.array(mats, dtype=object), self.p, embedding=E, ambient=amb,
                            name=name or f"{self.name}[sub]")


# --------------------------------------------------------------------------
# construction


def regular_matrices(G: FiniteGroup) -> np.ndarray:
    return np.array([_perm_matrix([int(G.mul[g, h]) for h in G.elements]) for g in G.elements], dtype=object)


def _extend_from_generators(G: FiniteGroup, gen_mats: dict) -> np.ndarray:
    d = next(iter(gen_mats.values())).shape[0]
    mats = {G.identity: exact.identity(d)}
    queue = deque([G.identity])
    while queue:
        h = queue.popleft()
        for s, A in gen_mats.items():
            k = int(G.mul[h, s])
            if k not in mats:
                mats[k] = exact.matmul(mats[h], A)
                queue.append(k)
    if len(mats) != G.size:
        raise ModuleError("generator matrices do not cover the group (elements not generated)")
    return np.array([mats[g] for g in G.elements], dtype=object)


def _sign(perm) -> int:
    perm = list(perm)
    s, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, L = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                L += 1
            if L % 2 == 0:
                s = -s
    return s


def build_module(G: FiniteGroup, repspec, p=None, name: str = "") -> BanachModule:
    """Build a module from a rep spec.

    kinds: ``regular``, ``trivial`` (``dim``), ``permutation`` (``action``:
    one image list per element, or ``generator_action``: element -> images),
    ``natural`` (permutation groups; ``twist: "sign"`` gives signed
    permutations), ``sign``, ``matrices`` (``entries``: element -> matrix).
    ``part: "complement" | "invariant"`` keeps X_G or X^G.
    """
    if isinstance(repspec, str):
        repspec = {"kind": repspec}
    if p is None:
        p = repspec.get("p", 2)
    kind = repspec.get("kind")
    if kind == "regular":
        mats = regular_matrices(G)
    elif kind == "trivial":
        d = int(repspec.get("dim", 1))
        mats = np.array([exact.identity(d) for _ in G.elements], dtype=object)
    elif kind == "permutation":
        if "action" in repspec:
            action = repspec["action"]
            if len(action) != G.size:
                raise ModuleError("permutation action needs one image list per element")
            mats = np.array([_perm_matrix(a) for a in action], dtype=object)
        else:
            gen = {int(k): _perm_matrix(v) for k, v in repspec["generator_action"].items()}
            mats = _extend_from_generators(G, gen)
    elif kind in ("natural", "sign"):
        if not all(isinstance(lab, tuple) for lab in G.labels):
            raise ModuleError(f"{kind} representation needs a permutation group")
        if kind == "sign":
            mats = np.array([exact.frac_array([[_sign(lab)]]) for lab in G.labels], dtype=object)
        else:
            twist = repspec.get("twist")
            mats = []
            for lab in G.labels:
                A = _perm_matrix(lab)
                if twist == "sign":
                    A = A * _sign(lab)
                mats.append(A)
            mats = np.array(mats, dtype=object)
    elif kind == "matrices":
        entries = repspec["entries"]
        gen = {int(k): exact.frac_array(v) for k, v in entries.items()}
        mats = _extend_from_generators(G, gen)
        for g, A in gen.items():
            if not np.array_equal(mats[g], A):
                raise ModuleError(f"generator matrices inconsistent with the group relations at element {g}")
    else:
        raise ModuleError(f"unknown representation kind {kind!r}")
    M = BanachModule(G, mats, p, name=name or repspec.get("name", kind))
    part = repspec.get("part")
    if part:
        dec = invariants_and_decomposition(M, G.whole())
        if part == "complement":
            return M.submodule(dec.complement_basis, name=f"{M.name}_G")
        if part == "invariant":
            return M.submodule(dec.invariant_basis, name=f"{M.name}^G")
        raise ModuleError(f"unknown part {part!r}")
    return M


def apply_algebra(M: BanachModule, xi: GroupAlgebraElement) -> np.ndarray:
    """pi(xi) = sum_g xi(g) pi(g)."""
    if xi.group is not M.group:
        raise ModuleError("algebra element over a different group")
    out = exact.zeros((M.dim, M.dim)) if xi.exact else np.zeros((M.dim, M.dim))
    mats = M.matrices if xi.exact else M.float_matrices()
    for g, t in xi.coeffs.items():
        out = out + t * mats[g]
    return out


# --------------------------------------------------------------------------
# invariants


@dataclass
class Decomposition:
    invariant_basis: np.ndarray
    complement_basis: np.ndarray
    projector: np.ndarray

    @property
    def dim_invariant(self) -> int:
        return self.invariant_basis.shape[0]


def fixed_space(M: BanachModule, elements) -> np.ndarray:
    """Basis (rows) of the vectors fixed by every pi(h), h in ``elements``."""
    d = M.dim
    I = exact.identity(d)
    blocks = [I - M.matrices[h] for h in elements]
    if not blocks or d == 0:
        return exact.identity(d)
    return exact.nullspace(np.vstack(blocks))


def common_fixed_space(d: int, operators) -> np.ndarray:
    I = exact.identity(d)
    blocks = [I - np.asarray(T, dtype=object) for T in operators]
    if not blocks:
        return exact.identity(d)
    return exact.nullspace(np.vstack(blocks))


def invariants_and_decomposition(M: BanachModule, H: Subgroup) -> Decomposition:
    """X = X^H + X_H with the averaging idempotent pi(uniform(H))."""
    X_H = fixed_space(M, H.generators())
    P = apply_algebra(M, uniform_average(M.group, H.elements))
    if not np.array_equal(exact.matmul(P, P), P):
        raise AssertionError("averaging operator is not idempotent")
    comp = exact.nullspace(P) if M.dim else exact.zeros((0, 0))
    if X_H.shape[0] and not exact.same_span(exact.column_space(P), X_H):
        raise AssertionError("image of the averaging projector differs from X^H")
    if X_H.shape[0] + comp.shape[0] != M.dim:
        raise AssertionError("X^H and X_H do not span X")
    # 0 lies in the convex hull of the orbit of every x in X_H: P x = 0
    for v in comp:
        if not exact.is_zero(exact.matmul(P, v)):
            raise AssertionError("projector does not annihilate X_H")
    for h in H.elements:
        A = M.matrices[h]
        if X_H.shape[0] and not exact.span_contains(X_H, exact.matmul(X_H, A.T)):
            raise AssertionError("X^H not invariant")
        if comp.shape[0] and not exact.span_contains(comp, exact.matmul(comp, A.T)):
            raise AssertionError("X_H not invariant")
    return Decomposition(X_H, comp, P)


# --------------------------------------------------------------------------
# operator norms


def _dual(y, p):
    """Norming functional direction of y for l^p (a vector in l^q)."""
    y = np.asarray(y, dtype=float)
    if p == INF:
        out = np.zeros_like(y)
        i = int(np.argmax(np.abs(y)))
        out[i] = np.sign(y[i]) or 1.0
        return out
    p = float(p)
    if p == 1.0:
        return np.sign(y)
    a = np.abs(y)
    m = a.max()
    if m == 0:
        return np.zeros_like(y)
    return np.sign(y) * (a / m) ** (p - 1)


def _ratio(A, x, p):
    nx = lp_norm(x, p)
    return lp_norm(A @ x, p) / nx if nx > 0 else 0.0


def _power_lower(A: np.ndarray, p, starts: int, rng, iters: int = 200) -> float:
    n = A.shape[1]
    q = INF if float(p) == 1.0 else (1.0 if p == INF else float(p) / (float(p) - 1.0))
    candidates = [np.eye(n)[j] for j in range(n)]
    candidates += [rng.standard_normal(n) for _ in range(starts)]
    candidates.append(np.ones(n))
    best = 0.0
    for x in candidates:
        best = max(best, _ratio(A, x, p))
        for _ in range(iters):
            y = A @ x
            if not np.any(y):
                break
            z = A.T @ _dual(y, p)
            x_new = _dual(z, q)
            r = _ratio(A, x_new, p)
            if r <= best * (1 + 1e-15) and r <= _ratio(A, x, p) + 1e-15:
                best = max(best, r)
                break
            x = x_new
            best = max(best, r)
    return best


def _schur_upper(B: np.ndarray, p: float, rng) -> float:
    """Weighted Hoelder (Schur test) bound for a nonnegative matrix B.

    For any positive x: ||B||_p^p <= max_j (B^T (Bx)^(p-1))_j / x_j^(p-1).
    x is taken from the nonlinear power iteration, where the bound is tight.
    """
    n = B.shape[1]
    x = np.ones(n)
    q = p / (p - 1.0)
    for _ in range(500):
        y = B @ x
        z = B.T @ (y ** (p - 1))
        x_new = z ** (q - 1)
        s = x_new.max()
        if s == 0:
            return 0.0
        x_new = x_new / s
        if np.allclose(x_new, x, rtol=1e-14, atol=1e-300):
            x = x_new
            break
        x = x_new
    y = B @ x
    num = B.T @ (y ** (p - 1))
    den = x ** (p - 1)
    # a vanishing weight only certifies a zero column
    zero_col = ~B.any(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(den > 0, num / den, np.where(zero_col, 0.0, np.inf))
    return float(ratios.max() ** (1.0 / p))


BOX_DIM_LIMIT = 6
BOX_BUDGET = 400_000


def _box_bounds(N, D, lo, hi, p):
    """Interval upper bound of ||N c|| / ||D c|| over each box [lo, hi]."""
    c, r = (lo + hi) / 2, (hi - lo) / 2
    num_c, num_r = c @ N.T, r @ np.abs(N).T
    num = _row_norms(np.abs(num_c) + num_r, p)
    den_c, den_r = c @ D.T, r @ np.abs(D).T
    den = _row_norms(np.maximum(np.abs(den_c) - den_r, 0.0), p)
    with np.errstate(divide="ignore", invalid="ignore"):
        ub = np.where(den > 0, num / den, np.inf)
        centre = _row_norms(num_c, p) / np.maximum(_row_norms(den_c, p), 1e-300)
    return ub, centre


def _box_upper(N: np.ndarray, D: np.ndarray, p, lower: float, rel_gap: float = 1e-6,
               budget: int = BOX_BUDGET) -> tuple[float, float]:
    """Branch and bound for max ||N c||_p / ||D c||_p over c != 0.

    By homogeneity c ranges over the faces c_i = 1 of the unit cube (c and
    -c give the same ratio).  Boxes are split on their widest side; the
    returned upper bound is the largest interval bound among live boxes,
    slightly inflated against rounding.  Stops at the relative gap or when
    the box budget is spent.
    """
    n = N.shape[1]
    lo = -np.ones((n, n))
    hi = np.ones((n, n))
    idx = np.arange(n)
    lo[idx, idx] = 1.0
    used = 0
    upper = math.inf
    while True:
        ub, centre = _box_bounds(N, D, lo, hi, p)
        used += len(ub)
        lower = max(lower, float(centre.max()))
        upper = float(ub.max()) * (1 + 1e-12)
        if upper <= lower * (1 + rel_gap) or upper == 0:
            return lower, max(upper, lower)
        keep = ub > lower * (1 + rel_gap / 2)
        lo, hi = lo[keep], hi[keep]
        if used + 2 * len(lo) > budget:
            return lower, max(upper, lower)
        w = hi - lo
        k = np.argmax(w, axis=1)
        rows = np.arange(len(lo))
        mid = (lo[rows, k] + hi[rows, k]) / 2
        lo2, hi2 = lo.copy(), hi.copy()
        hi[rows, k] = mid
        lo2[rows, k] = mid
        lo, hi = np.vstack([lo, lo2]), np.vstack([hi, hi2])


def _plain_operator_norm(A: np.ndarray, p, starts: int = 8, seed: int = 0) -> tuple[float, float]:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0, 0.0
    if not np.all(np.isfinite(A)):
        raise ModuleError("non-finite matrix entries")
    absA = np.abs(A)
    n1 = float(absA.sum(axis=0).max())
    ninf = float(absA.sum(axis=1).max())
    if p == 1:
        return n1, n1
    if p == INF:
        return ninf, ninf
    if p == 2:
        s = float(np.linalg.norm(A, 2))
        return s, s
    pf = float(p)
    rng = np.random.default_rng(seed)
    lower = _power_lower(A, p, starts, rng)
    upper = min(n1 ** (1.0 / pf) * ninf ** (1.0 - 1.0 / pf), _schur_upper(absA, pf, rng))
    if np.all(A >= 0):
        lower = max(lower, _power_lower(A, p, 0, rng))
    if upper > lower * (1 + 1e-6) and A.shape[1] <= BOX_DIM_LIMIT:
        lower, box = _box_upper(A, np.eye(A.shape[1]), p, lower)
        upper = min(upper, box)
    return lower, max(upper, lower)


def operator_norm(A, p, embedding=None, starts: int = 8, seed: int = 0) -> tuple[float, float]:
    """Bounds (lower, upper) on the p -> p operator norm of A.

    With an embedding E the norm on coordinates is ||E c||_p; the upper
    bound then uses the factorisation E A = (E A E^+) E.
    """
    p = parse_p(p)
    A = np.asarray(A, dtype=object).astype(float) if np.asarray(A).dtype == object else np.asarray(A, float)
    if embedding is None:
        return _plain_operator_norm(A, p, starts, seed)
    E = np.asarray(embedding, dtype=object).astype(float)
    if A.size == 0:
        return 0.0, 0.0
    if p == 2:
        R = np.linalg.qr(E, mode="r")
        s = float(np.linalg.norm(R @ A @ np.linalg.inv(R), 2))
        return s, s
    Ep = np.linalg.pinv(E)
    _, upper = _plain_operator_norm(E @ A @ Ep, p, starts, seed)
    rng = np.random.default_rng(seed)
    lower = 0.0
    n = A.shape[1]
    cands = [np.eye(n)[j] for j in range(n)] + [rng.standard_normal(n) for _ in range(starts * 4)]
    for c in cands:
        ec = E @ c
        nc = lp_norm(ec, p)
        if nc > 0:
            lower = max(lower, lp_norm(E @ (A @ c), p) / nc)
    if upper > lower * (1 + 1e-6) and n <= BOX_DIM_LIMIT:
        lower, box = _box_upper(E @ A, E, p, lower)
        upper = min(upper, box)
    return lower, max(lower, upper)


def module_operator_norm(M: BanachModule, A, seed: int = 0) -> tuple[float, float]:
    return operator_norm(A, M.p, M.embedding, seed=seed)


@dataclass
class AlmostInvariantReport:
    has_invariant_unit: bool
    gap_witness: GroupAlgebraElement | None
    norm_bound: float
    strict_convexity: bool
    checks: dict = field(default_factory=dict)


def almost_invariant_check(M: BanachModule, H: Subgroup | None = None) -> AlmostInvariantReport:
    """Decide whether X has (almost) invariant unit vectors under H.

    For finite H this happens exactly when X^H != 0; otherwise the uniform
    average over H is a gap witness and the three equivalent conditions
    (I - pi(xi) invertible, ||pi(xi)|| < 1, full support) are cross-checked.
    """
    H = H or M.group.whole()
    sc = strictly_convex(M.p)
    if not sc:
        warnings.warn(f"p={p_str(M.p)} is not strictly convex; report only", StrictConvexityWarning)
    fixed = fixed_space(M, H.generators())
    if fixed.shape[0]:
        return AlmostInvariantReport(True, None, 1.0, sc, {"dim_fixed": fixed.shape[0]})
    xi = uniform_average(M.group, H.elements)
    T = apply_algebra(M, xi)
    invertible = exact.rank(exact.identity(M.dim) - T) == M.dim if M.dim else True
    _, upper = module_operator_norm(M, T)
    full_support = set(xi.support) == set(H.elements)
    checks = {"dim_fixed": 0, "one_minus_invertible": invertible,
              "norm_below_one": upper < 1, "full_support": full_support}
    if not (invertible and upper < 1 and full_support):
        raise AssertionError(f"invertibility criteria disagree: {checks}")
    return AlmostInvariantReport(False, xi, upper, sc, checks)


# --------------------------------------------------------------------------
# quotient by invariants


class QuotientModule:
    """X / X^H with the induced action; H must be normal so X^H is G-invariant."""

    def __init__(self, base: BanachModule, H: Subgroup | None = None):
        G = base.group
        H = H or G.whole()
        if not H.is_normal():
            raise ModuleError("quotient by X^H needs H normal in G")
        dec = invariants_and_decomposition(base, H)
        self.base = base
        self.subspace = dec.invariant_basis
        self.complement = dec.complement_basis
        self.quotient_dim = base.dim - self.subspace.shape[0]
        k = self.subspace.shape[0]
        if base.dim:
            basis = np.hstack([self.subspace.T, self.complement.T]) if k else self.complement.T
            self._change = exact.inverse(basis)
        else:
            self._change = exact.zeros((0, 0))
        self.quotient_action = np.array(
            [self.coords(exact.matmul(base.matrices[g], self.complement.T)) for g in G.elements],
            dtype=object) if self.quotient_dim else np.empty((G.size, 0, 0), dtype=object)

    def coords(self, x) -> np.ndarray:
        """Complement coordinates of the class of x (x a vector or a matrix of columns)."""
        k = self.subspace.shape[0]
        return exact.matmul(self._change, np.asarray(x, dtype=object))[k:]

    def norm_sq_exact(self, x) -> Fraction:
        """Exact squared quotient norm for p = 2: squared distance to X^H."""
        M = self.base
        if M.p != 2:
            raise ModuleError("exact quotient norms need p = 2")
        x = np.asarray(x, dtype=object)
        total = M.norm_sq_exact(x)
        if self.subspace.shape[0] == 0:
            return total
        gram = M.gram()
        S = self.subspace.T
        b = exact.matmul(S.T, exact.matmul(gram, x))
        K = exact.matmul(S.T, exact.matmul(gram, S))
        return total - exact.matmul(b, exact.matmul(exact.inverse(K), b))

    def norm(self, x, tol: float = 1e-8) -> float:
        """inf over z in X^H of ||x + z||."""
        M = self.base
        x_arr = np.asarray(x)
        if self.subspace.shape[0] == 0:
            return M.norm(x_arr)
        if M.p == 2 and x_arr.dtype == object:
            return math.sqrt(max(self.norm_sq_exact(x_arr), 0))
        E = np.eye(M.dim) if M.embedding is None else M.embedding.astype(float)
        v = E @ np.asarray(x_arr, dtype=object).astype(float)
        S = E @ self.subspace.T.astype(float)
        return _distance_to_span(v, S, M.p, tol)

    def action(self, g: int) -> np.ndarray:
        return self.quotient_action[g]


def quotient_module(M: BanachModule, H: Subgroup | None = None) -> QuotientModule:
    return QuotientModule(M, H)


def _distance_to_span(v: np.ndarray, S: np.ndarray, p, tol: float) -> float:
    k = S.shape[1]
    base = lp_norm(v, p)
    if p == 2:
        z, *_ = np.linalg.lstsq(S, -v, rcond=None)
        return min(base, lp_norm(v + S @ z, 2))
    if p == 1 or p == INF:
        m = len(v)
        if p == 1:
            # vars: z (k), t (m); minimize sum t, -t <= v + S z <= t
            c = np.concatenate([np.zeros(k), np.ones(m)])
            A = np.block([[S, -np.eye(m)], [-S, -np.eye(m)]])
        else:
            c = np.concatenate([np.zeros(k), [1.0]])
            A = np.block([[S, -np.ones((m, 1))], [-S, -np.ones((m, 1))]])
        b = np.concatenate([-v, v])
        res = optimize.linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * k + [(0, None)] * (len(c) - k),
                               method="highs")
        if not res.success:
            return base
        z = res.x[:k]
        return min(base, lp_norm(v + S @ z, p))
    pf = float(p)

    def f(z):
        r = v + S @ z
        a = np.abs(r)
        val = np.sum(a ** pf)
        grad = S.T @ (pf * np.sign(r) * a ** (pf - 1))
        return val, grad

    z0, *_ = np.linalg.lstsq(S, -v, rcond=None)
    res = optimize.minimize(f, z0, jac=True, method="L-BFGS-B",
                            options={"maxiter": 10_000, "ftol": tol * 1e-3, "gtol": tol * 1e-3})
    return min(base, lp_norm(v + S @ res.x, p), lp_norm(v + S @ z0, p))


# --------------------------------------------------------------------------
# moduli of convexity


@dataclass(frozen=True)
class ConvexityReport:
    p: object
    epsilon: float
    delta_estimate: float
    method: str


def _sphere_2d(p, K: int) -> np.ndarray:
    th = np.linspace(0.0, 2 * np.pi, K, endpoint=False)
    u = np.stack([np.cos(th), np.sin(th)], axis=1)
    # exact axis and diagonal directions matter for flat faces
    u = np.vstack([u, [[1, 0], [0, 1], [-1, 0], [0, -1], [1, 1], [1, -1], [-1, 1], [-1, -1],
                       [0.5, 0.5], [1, 0.5], [0.5, 1]]])
    norms = np.array([lp_norm(r, p) for r in u])
    return u / norms[:, None]


def _row_norms(V: np.ndarray, p) -> np.ndarray:
    A = np.abs(V)
    if p == INF:
        return A.max(axis=-1)
    pf = float(p)
    return np.sum(A ** pf, axis=-1) ** (1.0 / pf)


def convexity_modulus(p, epsilon: float, dim: int = 2, mode: str = "auto", grid: int = 360) -> ConvexityReport:
    """delta(eps) = inf{1 - ||(x+y)/2|| : ||x|| = ||y|| = 1, ||x - y|| >= eps}.

    p = 2 uses the closed form.  Otherwise, in a coordinate plane, each unit
    x is paired with the unit y at distance exactly epsilon (root finding
    along the sphere) and the angle of x is minimised over.  Every such pair
    bounds delta from above, so the estimate is an upper estimate.
    """
    if not 0 <= epsilon <= 2:
        raise ModuleError("epsilon must lie in [0, 2]")
    if dim < 2:
        raise ModuleError("dim must be at least 2")
    p = parse_p(p)
    if p == 2 and mode in ("auto", "exact"):
        return ConvexityReport(p, epsilon, 1.0 - math.sqrt(max(0.0, 1.0 - epsilon ** 2 / 4.0)), "exact")
    if mode == "exact":
        raise ModuleError("closed form only available for p = 2")
    def unit(t):
        u = np.array([math.cos(t), math.sin(t)])
        return u / lp_norm(u, p)

    scan = np.linspace(0.0, math.pi, 65)

    def partner_value(t, side):
        # walk from x = unit(t) towards -x; the distance runs from 0 to 2, so
        # a partner at distance exactly epsilon exists on either side.  The
        # first crossing is bracketed on a coarse scan, then refined.
        x = unit(t)
        if epsilon == 0:
            return 0.0
        gap = lambda s: lp_norm(x - unit(t + side * s), p) - epsilon
        th = t + side * scan
        U = np.stack([np.cos(th), np.sin(th)], axis=1)
        U = U / _row_norms(U, p)[:, None]
        gaps = _row_norms(x[None, :] - U, p) - epsilon
        k = int(np.argmax(gaps >= 0))
        if gaps[k] < 0:
            return math.inf
        a, b = scan[max(k - 1, 0)], scan[k]
        if gap(a) >= 0:
            s = a
        elif gap(b) > 0:
            s = optimize.brentq(gap, a, b, xtol=1e-14)
        else:
            s = b    # vectorised and scalar norms disagree only by rounding
        return 1.0 - lp_norm((x + unit(t + side * s)) / 2, p)

    def best_at(t):
        return min(partner_value(t, 1), partner_value(t, -1))

    ts = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    vals = np.array([best_at(t) for t in ts])
    best = float(vals.min())
    h = ts[1] - ts[0]
    with np.errstate(invalid="ignore"):
        for k in np.argsort(vals)[:4]:
            res = optimize.minimize_scalar(best_at, bounds=(ts[k] - h, ts[k] + h), method="bounded",
                                           options={"xatol": 1e-12})
            best = min(best, float(res.fun))
    return ConvexityReport(p, epsilon, min(1.0, max(0.0, best)), "sampled")


def convexity_sweep(p, epsilons, dim: int = 2) -> list[ConvexityReport]:
    """Estimates over a sweep, made monotone: a pair feasible for a larger
    epsilon is feasible for every smaller one."""
    reps = [convexity_modulus(p, e, dim) for e in epsilons]
    order = np.argsort(epsilons)
    out = list(reps)
    running = math.inf
    for k in order[::-1]:
        running = min(running, reps[k].delta_estimate)
        out[k] = ConvexityReport(reps[k].p, reps[k].epsilon, running, reps[k].method)
    return out


def omega_estimate(p, t: float, grid: int = 360) -> float:
    """Sampled lower estimate of sup{||x - y|| : ||x||, ||y|| <= 1, ||x + y|| >= t}."""
    p = parse_p(p)
    S = _sphere_2d(p, grid)
    D = _row_norms(S[:, None, :] - S[None, :, :], p)
    Sum = _row_norms(S[:, None, :] + S[None, :, :], p)
    mask = Sum >= t
    return float(D[mask].max()) if mask.any() else 0.0
