"""Homotopy operators, splittings and the approximation procedures.

For xi in the simplex that commutes with a subgroup F, the operator

    (R phi)(f1..fn) = sum_{i=1..n+1} (-1)^(i+1) phi-hat(f1..f_{i-1}, xi, f_i..fn)

satisfies  phi|_F - pi(xi) phi|_F = d R phi + R d phi.  With F = G and
I - pi(xi) invertible, K = (I - pi(xi))^-1 R is a contracting homotopy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .algebra import GroupAlgebraElement, classify, convolve, uniform_average
from .cochains import (Cochain, apply_coboundary, coboundary_matrix, multiaffine_eval, restriction)
from .groups import Subgroup, f_conjugacy_classes
from .modules import (BanachModule, apply_algebra, fixed_space, common_fixed_space, module_operator_norm,
                      StrictConvexityWarning, p_str, strictly_convex)


class SplittingError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    def __init__(self, msg, best_bound, xi=None):
        super().__init__(msg)
        self.best_bound = best_bound
        self.xi = xi


def _require_simplex(xi: GroupAlgebraElement):
    if not classify(xi).in_simplex:
        raise SplittingError("xi must lie in the simplex (nonnegative, augmentation 1)")


def commutes_with_subgroup(xi: GroupAlgebraElement, F: Subgroup) -> bool:
    G = xi.group
    return all(xi.commutes_with(GroupAlgebraElement.delta(G, f)) for f in F.generators())


def _require_commutant(xi, F):
    if not commutes_with_subgroup(xi, F):
        raise SplittingError("xi does not commute with the acting subgroup")


def _require_strict(M: BanachModule, force: bool):
    if strictly_convex(M.p):
        return
    if not force:
        raise SplittingError(f"p={p_str(M.p)} is not strictly convex; pass force=True to run anyway")
    warnings.warn(f"p={p_str(M.p)} is not strictly convex; convergence is not guaranteed",
                  StrictConvexityWarning)


def r_xi(phi: Cochain, xi: GroupAlgebraElement) -> np.ndarray:
    """R_xi(phi) = sum_i t_i phi(g_i) for a 1-cochain."""
    if phi.degree != 1:
        raise ValueError("R_xi takes a 1-cochain")
    _require_simplex(xi)
    return multiaffine_eval(phi, xi)


# --------------------------------------------------------------------------
# inverting I - pi(xi)


@dataclass
class Inverse:
    matrix: np.ndarray
    method: str
    terms: int = 0
    residual_bound: float = 0.0
    norm_bound: float | None = None


def invert_one_minus(M: BanachModule, xi: GroupAlgebraElement, method: str = "direct",
                     k_max: int = 10_000, tol: float = 1e-12) -> Inverse:
    A = apply_algebra(M, xi)
    d = M.dim
    if method == "direct":
        try:
            inv = exact.inverse(exact.identity(d) - A) if d else exact.zeros((0, 0))
        except exact.SingularMatrixError:
            raise SplittingError("I - pi(xi) is singular") from None
        return Inverse(inv, "direct")
    if method != "neumann":
        raise ValueError(f"unknown method {method!r}")
    _, q = module_operator_norm(M, A)
    if q >= 1:
        raise SplittingError(f"Neumann series needs ||pi(xi)|| < 1, bound is {q}")
    if q == 0:
        k = 0
    else:
        k = max(0, math.ceil(math.log(tol * (1 - q)) / math.log(q)) - 1)
    if k > k_max:
        raise SplittingError(f"Neumann series needs {k} terms, above k_max={k_max}")
    Af = A.astype(float)
    S = np.eye(d)
    P = np.eye(d)
    for _ in range(k):
        P = P @ Af
        S = S + P
    return Inverse(S, "neumann", k, q ** (k + 1) / (1 - q), q)


def neumann_residuals(M: BanachModule, xi: GroupAlgebraElement, k_max: int) -> list[float]:
    """Operator-norm distance from the partial sums to the exact inverse, k = 0..k_max."""
    exact_inv = invert_one_minus(M, xi).matrix.astype(float)
    Af = apply_algebra(M, xi).astype(float)
    S, P = np.eye(M.dim), np.eye(M.dim)
    out = []
    for k in range(k_max + 1):
        if k:
            P = P @ Af
            S = S + P
        out.append(module_operator_norm(M, S - exact_inv)[1])
    return out


# --------------------------------------------------------------------------
# degree-1 splitting


@dataclass
class SplittingReport:
    degree: int
    projector_onto_B: np.ndarray
    complement_description: str
    complement_basis: np.ndarray
    idempotency_residual: object
    dims: dict = field(default_factory=dict)


def _r_xi_matrix(M: BanachModule, xi: GroupAlgebraElement) -> np.ndarray:
    N, d = M.group.size, M.dim
    R = exact.zeros((d, N * d))
    for g, t in xi.coeffs.items():
        for k in range(d):
            R[k, g * d + k] = t
    return R


def nowak_projection(M: BanachModule, xi: GroupAlgebraElement) -> SplittingReport:
    """P = d^1 (I - pi(xi))^-1 R_xi on flat C^1 coordinates."""
    _require_simplex(xi)
    inv = invert_one_minus(M, xi).matrix
    N, d = M.group.size, M.dim
    D1 = coboundary_matrix(M, 0).matrix.to_dense()
    R = _r_xi_matrix(M, xi)
    P = exact.matmul(exact.matmul(D1, inv), R) if d else exact.zeros((0, 0))
    P2 = exact.matmul(P, P)
    diff = P2 - P
    residual = max((abs(Fraction(v)) for v in diff.reshape(-1)), default=Fraction(0))
    if residual != 0:
        raise AssertionError("projector is not idempotent")
    dim_C = N * d
    img_P = exact.column_space(P) if d else exact.zeros((0, 0))
    img_D = exact.column_space(D1) if d else exact.zeros((0, 0))
    if not exact.same_span(img_P, img_D) if img_P.shape[0] or img_D.shape[0] else False:
        raise AssertionError("image of the projector differs from B^1")
    ker_R = exact.nullspace(R) if d else exact.zeros((0, 0))
    ker_P = exact.nullspace(P) if d else exact.zeros((0, 0))
    if ker_R.shape[0] != ker_P.shape[0] or (ker_R.shape[0] and not exact.same_span(ker_R, ker_P)):
        raise AssertionError("kernel of the projector differs from ker R_xi")
    dims = {"C1": dim_C, "B1": img_D.shape[0], "ker_R": ker_R.shape[0]}
    if dims["C1"] != dims["B1"] + dims["ker_R"]:
        raise AssertionError(f"dimension count fails: {dims}")
    return SplittingReport(1, P, "ker R_xi = {phi : phi-hat(xi) = 0}", ker_R, residual, dims)


# --------------------------------------------------------------------------
# the homotopy R


class HomotopyOperator:
    def __init__(self, M: BanachModule, xi: GroupAlgebraElement, F: Subgroup | None = None):
        F = F or M.group.whole()
        _require_simplex(xi)
        if xi.group is not M.group:
            raise SplittingError("xi over a different group")
        _require_commutant(xi, F)
        self.module = M
        self.xi = xi
        self.acting_subgroup = F
        self.target = M.restrict(F)
        self._pi_xi = None

    @property
    def pi_xi(self):
        if self._pi_xi is None:
            self._pi_xi = apply_algebra(self.module, self.xi)
        return self._pi_xi

    def apply(self, phi: Cochain) -> Cochain | None:
        """R phi, a cochain on F of one degree lower; None for degree 0."""
        if phi.module is not self.module:
            raise SplittingError("cochain over a different module")
        n = phi.degree
        if n == 0:
            return None
        v = self.xi.vector()
        if not phi.exact:
            v = v.astype(float)
        els = np.asarray(self.acting_subgroup.elements)
        out = None
        for i in range(n):
            # xi in slot i (0-based); tensordot keeps the other axes in order
            term = np.tensordot(phi.values, v, axes=([i], [0]))
            if n > 1:
                term = term[np.ix_(*([els] * (n - 1)), np.arange(self.module.dim))]
            term = term if i % 2 == 0 else -term
            out = term if out is None else out + term
        return Cochain(self.target, n - 1, out)

    def S(self, phi: Cochain) -> Cochain:
        return restriction(phi, self.acting_subgroup)

    def T(self, phi: Cochain) -> Cochain:
        return restriction(phi, self.acting_subgroup).postcompose(self.pi_xi)

    def residual(self, phi: Cochain) -> Cochain:
        """S phi - T phi - (d R phi + R d phi)."""
        lhs = self.S(phi) - self.T(phi)
        Rd = self.apply(apply_coboundary(phi))
        rhs = Rd
        Rphi = self.apply(phi)
        if Rphi is not None:
            rhs = rhs + apply_coboundary(Rphi)
        return lhs - rhs


def homotopy_R(phi: Cochain, xi: GroupAlgebraElement, F: Subgroup | None = None) -> Cochain | None:
    return HomotopyOperator(phi.module, xi, F).apply(phi)


def _first_nonzero(c: Cochain):
    nz = np.argwhere(c.values != 0)
    if len(nz) == 0:
        return None
    idx = tuple(int(i) for i in nz[0])
    return {"tuple": list(idx[:-1]), "coordinate": idx[-1], "value": exact.fraction_str(Fraction(c.values[idx]))
            if c.exact else float(c.values[idx])}


@dataclass
class ResidualReport:
    degrees: list
    trials: int
    residual: object
    witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.residual == 0


def _max_abs(c: Cochain):
    if c.values.size == 0:
        return Fraction(0) if c.exact else 0.0
    if c.exact:
        return max(abs(Fraction(v)) for v in c.values.reshape(-1))
    return float(np.abs(c.values).max())


def verify_homotopy_identity(M: BanachModule, xi: GroupAlgebraElement, F: Subgroup, degrees,
                             trials: int = 20, rng=None) -> ResidualReport:
    rng = rng if rng is not None else np.random.default_rng(0)
    H = HomotopyOperator(M, xi, F)
    worst = Fraction(0)
    witness = None
    for n in degrees:
        for _ in range(trials):
            phi = Cochain.random(M, n, rng)
            res = H.residual(phi)
            r = _max_abs(res)
            if r > worst:
                worst = r
                witness = {"degree": n, **(_first_nonzero(res) or {})}
    return ResidualReport(list(degrees), trials, worst, witness)


# --------------------------------------------------------------------------
# contracting homotopy


def _homotopy_sparse(M: BanachModule, xi: GroupAlgebraElement, inv: np.ndarray, n: int) -> exact.SparseMatrix:
    """Matrix of K = inv . R : C^n -> C^{n-1} (F = G) on flat coordinates."""
    N, d = M.group.size, M.dim
    rows = []
    coeffs = list(xi.coeffs.items())
    inv_rows = [{j: inv[k, j] for j in range(d) if inv[k, j] != 0} for k in range(d)]
    shape_in = (N,) * n
    for t in np.ndindex(*((N,) * (n - 1))):
        acc_raw: dict[int, Fraction] = {}
        for i in range(n):
            sgn = 1 if i % 2 == 0 else -1
            for g, c in coeffs:
                full = t[:i] + (g,) + t[i:]
                base = (int(np.ravel_multi_index(full, shape_in)) if n else 0) * d
                acc_raw[base] = acc_raw.get(base, 0) + sgn * c
        for k in range(d):
            row: dict[int, Fraction] = {}
            for base, c in acc_raw.items():
                if c == 0:
                    continue
                for j, w in inv_rows[k].items():
                    row[base + j] = row.get(base + j, 0) + c * w
            rows.append({j: v for j, v in row.items() if v != 0})
    return exact.SparseMatrix(rows, N ** n * d)


def _sparse_add_identity_check(A: exact.SparseMatrix, B: exact.SparseMatrix | None):
    """Return the first row where A + B differs from the identity, or None."""
    for i in range(A.shape[0]):
        acc = dict(A.rows[i])
        if B is not None:
            for j, v in B.rows[i].items():
                acc[j] = acc.get(j, 0) + v
        acc = {j: v for j, v in acc.items() if v != 0}
        if acc != {i: 1}:
            return i
    return None


class ContractingHomotopy:
    def __init__(self, M: BanachModule, xi: GroupAlgebraElement):
        G = M.group
        self.module = M
        self.xi = xi
        self.R = HomotopyOperator(M, xi, G.whole())
        self.inverse_matrix = invert_one_minus(M, xi).matrix
        self._K: dict[int, exact.SparseMatrix] = {}

    def apply(self, phi: Cochain) -> Cochain | None:
        r = self.R.apply(phi)
        return None if r is None else r.postcompose(self.inverse_matrix)

    def K_matrix(self, n: int) -> exact.SparseMatrix:
        if n not in self._K:
            self._K[n] = _homotopy_sparse(self.module, self.xi, self.inverse_matrix, n)
        return self._K[n]

    def verify_degree(self, n: int) -> int | None:
        """Check I = d K + K d on C^n as an operator identity; return a failing row or None."""
        M = self.module
        up = coboundary_matrix(M, n).matrix            # C^n -> C^{n+1}
        Kd = self.K_matrix(n + 1).matmul(up)
        if n == 0:
            return _sparse_add_identity_check(Kd, None)
        dK = coboundary_matrix(M, n - 1).matrix.matmul(self.K_matrix(n))
        return _sparse_add_identity_check(Kd, dK)

    def verify(self, degrees) -> dict:
        return {n: self.verify_degree(n) for n in degrees}

    def splitting_projector(self, n: int) -> exact.SparseMatrix:
        """d K on C^n, the projection onto B^n along K-kernel."""
        if n == 0:
            return exact.SparseMatrix([{} for _ in range(self.module.dim)], self.module.dim)
        return coboundary_matrix(self.module, n - 1).matrix.matmul(self.K_matrix(n))


def contracting_homotopy(M: BanachModule, xi: GroupAlgebraElement) -> ContractingHomotopy:
    _require_simplex(xi)
    _require_commutant(xi, M.group.whole())
    return ContractingHomotopy(M, xi)


# --------------------------------------------------------------------------
# contracting pairs and restriction


@dataclass
class ContractingPair:
    xi: GroupAlgebraElement
    zeta: GroupAlgebraElement
    norm_bound: float
    A: tuple
    B: tuple

    @property
    def product(self) -> GroupAlgebraElement:
        return convolve(self.xi, self.zeta)


def find_contracting_pair(M: BanachModule, F: Subgroup) -> ContractingPair:
    """xi uniform over A = F, zeta uniform over a union of F-classes B with A B = G."""
    G = M.group
    if fixed_space(M, G.whole().generators()).shape[0]:
        raise SplittingError("X^G is nonzero: no contracting pair exists")
    A = F.elements
    xi = uniform_average(G, A)
    cd = f_conjugacy_classes(G, F)
    order = sorted(range(len(cd.classes)), key=lambda i: (len(cd.classes[i]), cd.classes[i][0]))
    chosen: list[int] = []
    covered: set = set()
    for i in order:
        new = {int(G.mul[a, b]) for a in A for b in cd.classes[i]}
        if not new <= covered:
            chosen.append(i)
            covered |= new
        if len(covered) == G.size:
            break
    attempts = [sorted(h for i in chosen for h in cd.classes[i]), list(G.elements)]
    for B in attempts:
        zeta = uniform_average(G, B)
        prod = convolve(xi, zeta)
        _, upper = module_operator_norm(M, apply_algebra(M, prod))
        if upper < 1:
            _require_commutant(zeta, F)
            return ContractingPair(xi, zeta, upper, tuple(A), tuple(B))
    raise SplittingError("could not certify ||pi(xi zeta)|| < 1")


def restriction_nullifier(phi: Cochain, F: Subgroup, xi: GroupAlgebraElement) -> Cochain:
    """psi on F with d psi = phi|_F, for a cocycle phi."""
    if phi.degree < 1:
        raise ValueError("needs degree at least 1")
    if not apply_coboundary(phi).is_zero():
        raise SplittingError("phi is not a cocycle")
    H = HomotopyOperator(phi.module, xi, F)
    inv = invert_one_minus(phi.module, xi).matrix
    psi = H.apply(phi).postcompose(inv)
    if not apply_coboundary(psi) == restriction(phi, F):
        raise AssertionError("d psi differs from the restriction")
    return psi


# --------------------------------------------------------------------------
# approximation procedures


def _norm(M: BanachModule, v) -> float:
    return M.norm(v)


def _below(M: BanachModule, v, eps) -> tuple[bool, float, bool]:
    """(norm < eps, norm, certified).  Integer p compares exact p-th powers."""
    if M.p != math.inf and M.p.denominator == 1 and np.asarray(v).dtype == object:
        p = int(M.p)
        amb = M.ambient_coords(np.asarray(v, dtype=object))
        s = sum((abs(Fraction(t)) ** p for t in amb), Fraction(0))
        return s < Fraction(eps) ** p, float(s) ** (1.0 / p), True
    n = _norm(M, np.asarray(v))
    return n < eps, n, False


def _project_simplex(y: np.ndarray) -> np.ndarray:
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(y) + 1)
    rho = np.nonzero(u * k > css - 1)[0][-1]
    theta = (css[rho] - 1) / (rho + 1)
    return np.maximum(y - theta, 0)


def _convex_weights(V: np.ndarray, p, tol: float, iters: int = 10_000) -> np.ndarray:
    """Projected (accelerated) gradient for min ||V lam||_p over the simplex; V columns are candidates."""
    m = V.shape[1]
    pf = 2.0 if p == 2 else float(p)
    lam = np.full(m, 1.0 / m)
    L = max(np.linalg.norm(V, 2) ** 2, 1e-300)

    def value(l):
        from .modules import lp_norm
        return lp_norm(V @ l, p)

    best, best_val = lam.copy(), value(lam)
    y, t = lam.copy(), 1.0
    for _ in range(iters):
        r = V @ y
        if pf == 2.0:
            grad = 2 * V.T @ r
        else:
            nr = max(np.sum(np.abs(r) ** pf) ** (1 / pf), 1e-300)
            grad = V.T @ (np.sign(r) * (np.abs(r) / nr) ** (pf - 1))
        new = _project_simplex(y - grad / (2 * L))
        t_new = (1 + math.sqrt(1 + 4 * t * t)) / 2
        y = new + ((t - 1) / t_new) * (new - lam)
        lam, t = new, t_new
        val = value(lam)
        if val < best_val:
            best, best_val = lam.copy(), val
        if best_val < tol:
            break
    return best


def _rational_weights(lam: np.ndarray) -> list[Fraction]:
    w = [Fraction(float(x)).limit_denominator(10 ** 12) for x in lam]
    w = [max(x, Fraction(0)) for x in w]
    s = sum(w)
    if s == 0:
        return [Fraction(1, len(w))] * len(w)
    return [x / s for x in w]


@dataclass
class ShrinkResult:
    xi: GroupAlgebraElement
    bounds: list
    certified: bool
    steps: int
    best_bound: float


def _candidate_words(gens, max_len: int, cap: int):
    """Products of generators up to length max_len, breadth first, deduplicated."""
    seen = {}
    frontier = [((j,), g) for j, g in enumerate(gens)]
    for word, el in frontier:
        seen.setdefault(el, word)
    for _ in range(max_len - 1):
        nxt = []
        for word, el in frontier:
            for j, g in enumerate(gens):
                new = convolve(g, el)
                if new not in seen:
                    seen[new] = word + (j,)
                    nxt.append((word + (j,), new))
                    if len(seen) >= cap:
                        return list(seen)
        frontier = nxt
        if not frontier:
            break
    return list(seen)


def _shrink_one(M: BanachModule, gens, mats, y, eps, max_steps, word_len, word_cap):
    """Find U in the convex hull of the semigroup with ||pi(U) y|| < eps; returns (U, steps)."""
    G = M.group
    U = GroupAlgebraElement.delta(G, G.identity)
    v = y
    steps = 0
    ok, cur, _ = _below(M, v, eps)
    while not ok and steps < max_steps:
        # greedy descent: lexicographically first generator among the best
        vals = [_norm(M, exact.matmul(A, v).astype(float)) for A in mats]
        j = int(np.argmin(vals))
        if vals[j] < cur * (1 - 1e-9):
            U = convolve(gens[j], U)
            v = exact.matmul(mats[j], v)
            steps += 1
            ok, cur, _ = _below(M, v, eps)
            continue
        # stalled: convex refinement over short words
        words = _candidate_words(gens, word_len, word_cap)
        W = [apply_algebra(M, w) for w in words]
        V = np.stack([exact.matmul(A, v).astype(float) for A in W], axis=1)
        if M.embedding is not None:
            V = M.embedding.astype(float) @ V
        lam = _convex_weights(V, M.p, tol=eps / 10)
        weights = _rational_weights(lam)
        T = GroupAlgebraElement.zero(G)
        for w, el in zip(weights, words):
            if w:
                T = T + el * w
        v_new = exact.matmul(apply_algebra(M, T), v)
        ok_new, new, _ = _below(M, v_new, eps)
        steps += 1
        if new >= cur * (1 - 1e-9):
            break
        U, v, cur, ok = convolve(T, U), v_new, new, ok_new
    return U, v, ok, steps


def shrinking_average(M: BanachModule, generators, E, eps: float, max_steps: int = 200,
                      word_len: int = 8, word_cap: int = 256, force: bool = False) -> ShrinkResult:
    """xi in the convex semigroup hull of ``generators`` with max_{x in E} ||pi(xi) x|| < eps.

    The vectors are handled one at a time: T_i shrinks pi(T_{i-1}..T_1) x_i,
    and since every pi(T) is a contraction earlier vectors stay small.
    """
    _require_strict(M, force)
    gens = list(generators)
    if not gens:
        raise SplittingError("need at least one semigroup generator")
    for g in gens:
        _require_simplex(g)
    mats = [apply_algebra(M, g) for g in gens]
    if common_fixed_space(M.dim, mats).shape[0]:
        raise SplittingError("the semigroup has a nonzero common fixed vector")
    G = M.group
    xi = GroupAlgebraElement.delta(G, G.identity)
    total = 0
    for x in E:
        x = exact.frac_array(x)
        y = exact.matmul(apply_algebra(M, xi), x)
        U, _, ok, steps = _shrink_one(M, gens, mats, y, eps, max_steps - total, word_len, word_cap)
        total += steps
        xi = convolve(U, xi)
        if not ok:
            P = apply_algebra(M, xi)
            best = max(_below(M, exact.matmul(P, exact.frac_array(z)), eps)[1] for z in E)
            raise BudgetExhausted(f"budget of {max_steps} steps exhausted", best, xi)
    P = apply_algebra(M, xi)
    checks = [_below(M, exact.matmul(P, exact.frac_array(x)), eps) for x in E]
    if not all(c[0] for c in checks):
        raise AssertionError("composite lost an earlier bound")
    bounds = [c[1] for c in checks]
    return ShrinkResult(xi, bounds, all(c[2] for c in checks), total, max(bounds, default=0.0))


@dataclass
class WitnessResult:
    psi: Cochain
    xi: GroupAlgebraElement
    sup_bound: float
    certified: bool
    primitive: Cochain | None


def _check_no_invariants(M: BanachModule):
    if fixed_space(M, M.group.whole().generators()).shape[0]:
        raise SplittingError("X^G is nonzero")


def almost_coboundary_witness(phi: Cochain, F: Subgroup, E, eps: float, max_steps: int = 200,
                              force: bool = False) -> WitnessResult:
    """psi = (phi - pi(xi) phi)|_F in B^n(F, X), close to phi on the tuples E."""
    M = phi.module
    _check_no_invariants(M)
    _require_strict(M, force)
    if not apply_coboundary(phi).is_zero():
        raise SplittingError("phi is not a cocycle")
    G = M.group
    cd = f_conjugacy_classes(G, F)
    gens = [uniform_average(G, c) for c in cd.classes]
    E = [tuple(int(g) for g in t) for t in E]
    for t in E:
        if len(t) != phi.degree or not all(g in F for g in t):
            raise ValueError(f"{t} is not a tuple in F^{phi.degree}")
    values = [phi.values[t] if phi.degree else phi.values for t in E]
    res = shrinking_average(M, gens, values, eps, max_steps=max_steps, force=force)
    xi = res.xi
    H = HomotopyOperator(M, xi, F)
    psi = H.S(phi) - H.T(phi)
    primitive = H.apply(phi)
    if primitive is not None and not apply_coboundary(primitive) == psi:
        raise AssertionError("psi is not the coboundary of R phi")
    pos = {g: i for i, g in enumerate(F.elements)}
    diffs = []
    for t in E:
        key = tuple(pos[g] for g in t)
        diffs.append(_below(M, restriction(phi, F).values[key] - psi.values[key], eps))
    if not all(c[0] for c in diffs):
        raise AssertionError("sup bound not achieved")
    return WitnessResult(psi, xi, max((c[1] for c in diffs), default=0.0),
                         all(c[2] for c in diffs), primitive)


@dataclass
class DecayResult:
    x: np.ndarray
    xi: GroupAlgebraElement
    bound: float
    certified: bool
    power: int | None
    sigma: GroupAlgebraElement


def generator_average_decay(phi: Cochain, sigma_set, eps: float, max_power: int = 400,
                            force: bool = False) -> DecayResult:
    """x with ||sum_{g in Sigma} (phi - d x)(g)|| < eps, Sigma augmented by the identity."""
    M = phi.module
    G = M.group
    _check_no_invariants(M)
    _require_strict(M, force)
    if phi.degree != 1 or not apply_coboundary(phi).is_zero():
        raise SplittingError("phi must be a 1-cocycle")
    S = sorted(set(int(g) for g in sigma_set) | {G.identity})
    sigma = uniform_average(G, S)
    target = eps / len(S)
    v = multiaffine_eval(phi, sigma)
    Ps = apply_algebra(M, sigma)
    xi = None
    power = None
    cur = sigma
    w = exact.matmul(Ps, v)
    powers = []
    for k in range(1, max_power + 1):
        powers.append((cur, w))
        if _below(M, w, target)[0]:
            xi, power = cur, k
            break
        cur = convolve(sigma, cur)
        w = exact.matmul(Ps, w)
    if xi is None:
        # convex search over the last few powers
        tail = powers[-32:]
        V = np.stack([np.asarray(p[1], dtype=object).astype(float) for p in tail], axis=1)
        if M.embedding is not None:
            V = M.embedding.astype(float) @ V
        lam = _rational_weights(_convex_weights(V, M.p, target / 10))
        cand = GroupAlgebraElement.zero(G)
        for wgt, (el, _) in zip(lam, tail):
            if wgt:
                cand = cand + el * wgt
        if not _below(M, exact.matmul(apply_algebra(M, cand), v), target)[0]:
            best = min(_below(M, p[1], target)[1] for p in powers) * len(S)
            raise BudgetExhausted("power budget exhausted", best, cand)
        xi = cand
    x = multiaffine_eval(phi, xi)
    dx = apply_coboundary(Cochain(M, 0, x))
    # proof identity: dx(sigma) = (I - pi(xi)) phi-hat(sigma)
    lhs = multiaffine_eval(dx, sigma)
    rhs = v - exact.matmul(apply_algebra(M, xi), v)
    if not np.array_equal(lhs, rhs):
        raise AssertionError("identity d x(sigma) = (I - pi(xi)) phi-hat(sigma) fails")
    total = sum((phi.values[g] - dx.values[g] for g in S), exact.zeros(M.dim))
    ok, nrm, cert = _below(M, total, eps)
    if not ok:
        raise AssertionError("decay bound not achieved")
    return DecayResult(x, xi, nrm, cert, power, sigma)
