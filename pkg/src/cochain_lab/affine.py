"""Affine isometric actions alpha(g) x = pi(g) x + phi(g), and degree-1
cohomology of finitely presented groups by word recursion.

For a presentation the cocycle is the tuple v_i = phi(s_i); a word is
evaluated with phi(u w) = phi(u) + pi(u) phi(w) and
phi(s^-1) = -pi(s^-1) phi(s).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from . import exact
from .algebra import GroupAlgebraElement, convolve, uniform_average
from .cochains import Cochain, apply_coboundary, cohomology, multiaffine_eval
from .modules import (BanachModule, ModuleError, QuotientModule, _is_signed_permutation, apply_algebra,
                      lp_norm, parse_p, p_str, quotient_module, fixed_space)


class AffineError(ValueError):
    pass


# --------------------------------------------------------------------------
# finite groups


class AffineAction:
    """alpha(g) = pi(g) + phi(g) for a 1-cocycle phi on a finite group."""

    def __init__(self, module: BanachModule, cocycle: Cochain, check: bool = True):
        if cocycle.degree != 1 or cocycle.module is not module:
            raise AffineError("translation part must be a 1-cochain of the module")
        if check:
            if not apply_coboundary(cocycle).is_zero():
                raise AffineError("translation part is not a cocycle")
            if not exact.is_zero(cocycle.values[module.group.identity]):
                raise AffineError("phi(e) must vanish")
        self.module = module
        self.cocycle = cocycle

    finite = True

    def __call__(self, g: int, x) -> np.ndarray:
        return exact.matmul(self.module.matrices[g], np.asarray(x, dtype=object)) + self.cocycle.values[g]

    def extended(self, xi: GroupAlgebraElement, x) -> np.ndarray:
        """alpha(xi) x = sum_g xi(g) alpha(g) x."""
        x = np.asarray(x, dtype=object)
        out = exact.zeros(self.module.dim)
        for g, t in xi.coeffs.items():
            out = out + t * self(g, x)
        return out

    def generator_system(self):
        G = self.module.group
        return [(self.module.matrices[s], self.cocycle.values[s]) for s in G.whole().generators()]

    def displacement_terms(self, elements):
        return [(self.module.matrices[g], self.cocycle.values[g]) for g in elements]


def action_from_cocycle(M: BanachModule, phi: Cochain) -> AffineAction:
    return AffineAction(M, phi)


def cocycle_from_action(alpha: AffineAction) -> Cochain:
    """phi(g) = alpha(g) 0."""
    M = alpha.module
    zero = exact.zeros(M.dim)
    vals = np.array([alpha(g, zero) for g in M.group.elements], dtype=object).reshape(M.group.size, M.dim)
    return Cochain(M, 1, vals)


@dataclass
class FixedPointSet:
    point: np.ndarray | None
    directions: np.ndarray
    barycenter_checked: bool = False

    @property
    def empty(self) -> bool:
        return self.point is None

    @property
    def unique(self) -> bool:
        return self.point is not None and self.directions.shape[0] == 0

    def contains(self, x) -> bool:
        if self.point is None:
            return False
        diff = np.asarray(x, dtype=object) - self.point
        if exact.is_zero(diff):
            return True
        return self.directions.shape[0] > 0 and exact.span_contains(self.directions, diff[None, :])


def _solve_generator_system(system, d):
    if not system:
        return exact.zeros(d), exact.identity(d)
    A = np.vstack([exact.identity(d) - P for P, _ in system])
    b = np.concatenate([np.asarray(v, dtype=object) for _, v in system])
    sol = exact.solve(A, b) if d else exact.zeros(0)
    directions = exact.nullspace(A) if d else exact.zeros((0, 0))
    return sol, directions


def fixed_points(alpha) -> FixedPointSet:
    """Exact solution set of (I - pi(s)) x = phi(s) over generators s."""
    d = alpha.module.dim
    sol, directions = _solve_generator_system(alpha.generator_system(), d)
    if sol is None:
        return FixedPointSet(None, directions)
    checked = False
    if getattr(alpha, "finite", False):
        G = alpha.module.group
        for g in G.elements:
            if not np.array_equal(alpha(g, sol), sol):
                raise AssertionError("fixed point of the generators is moved by the group")
        bary = multiaffine_eval(alpha.cocycle, uniform_average(G, G.elements))
        for g in G.elements:
            if not np.array_equal(alpha(g, bary), bary):
                raise AssertionError("barycenter of the orbit of 0 is not fixed")
        checked = True
    return FixedPointSet(sol, directions, checked)


@dataclass
class AlmostFixedReport:
    x: np.ndarray
    value: float
    below_eps: bool
    exact_fixed: bool
    seed: int
    restarts: int


def _displacement(terms, p, embedding):
    """f(x) = max_i ||(I - A_i) x - b_i||_p and a subgradient."""
    mats = [(np.eye(A.shape[0]) - A.astype(float), np.asarray(b, dtype=object).astype(float)) for A, b in terms]
    E = None if embedding is None else embedding.astype(float)

    def f(x):
        best, grad = -1.0, None
        for B, b in mats:
            r = B @ x - b
            amb = r if E is None else E @ r
            val = lp_norm(amb, p)
            if val > best:
                best = val
                if val == 0:
                    g = np.zeros_like(x)
                elif p == math.inf:
                    i = int(np.argmax(np.abs(amb)))
                    dual = np.zeros_like(amb)
                    dual[i] = np.sign(amb[i])
                    g = B.T @ (dual if E is None else E.T @ dual)
                else:
                    pf = float(p)
                    dual = np.sign(amb) * (np.abs(amb) / val) ** (pf - 1)
                    g = B.T @ (dual if E is None else E.T @ dual)
                grad = g
        return best, grad

    return f


def almost_fixed_point(alpha, E, eps: float, restarts: int = 16, iters: int = 10_000, seed: int = 0,
                       step: float = 1.0) -> AlmostFixedReport:
    """Minimise max_{g in E} ||x - alpha(g) x|| by subgradient descent with restarts."""
    M = alpha.module
    fp = fixed_points(alpha)
    if not fp.empty:
        return AlmostFixedReport(fp.point, 0.0, True, True, seed, 0)
    terms = alpha.displacement_terms(E)
    f = _displacement(terms, M.p, M.embedding)
    rng = np.random.default_rng(seed)
    d = M.dim
    best_x, best_val = np.zeros(d), f(np.zeros(d))[0]
    for r in range(restarts):
        x = rng.standard_normal(d) * (1 + r)
        for t in range(1, iters + 1):
            val, g = f(x)
            if val < best_val:
                best_val, best_x = val, x.copy()
            gn = np.linalg.norm(g)
            if gn == 0 or best_val < eps * 1e-3:
                break
            x = x - (step / math.sqrt(t)) * g / gn
    return AlmostFixedReport(best_x, float(best_val), best_val < eps, False, seed, restarts)


@dataclass
class HullReport:
    ok: bool
    trials: int
    failures: list = field(default_factory=list)


def delta_orbit_hull_check(alpha: AffineAction, x, trials: int = 100, rng=None) -> HullReport:
    """conv(alpha(G) x) = alpha(Delta G) x, checked exactly and by LP membership."""
    rng = rng if rng is not None else np.random.default_rng(0)
    M = alpha.module
    G = M.group
    x = exact.frac_array(x)
    orbit = [alpha(g, x) for g in G.elements]
    orbit_f = np.array([np.asarray(o, dtype=object).astype(float) for o in orbit]).T
    failures = []
    for t in range(trials):
        raw = rng.integers(0, 5, size=G.size)
        if raw.sum() == 0:
            raw[rng.integers(G.size)] = 1
        xi = GroupAlgebraElement(G, {g: Fraction(int(c), int(raw.sum())) for g, c in enumerate(raw) if c})
        # biaffine identity: alpha(xi) x = pi(xi) x + phi-hat(xi)
        lhs = alpha.extended(xi, x)
        rhs = exact.matmul(apply_algebra(M, xi), x) + multiaffine_eval(alpha.cocycle, xi)
        if not np.array_equal(lhs, rhs):
            failures.append({"trial": t, "kind": "biaffine", "xi": xi.to_json()})
            continue
        # a convex combination of orbit points is alpha of the same weights
        comb = sum((xi[g] * orbit[g] for g in G.elements), exact.zeros(M.dim))
        if not np.array_equal(comb, lhs):
            failures.append({"trial": t, "kind": "hull->delta", "xi": xi.to_json()})
            continue
        # independent membership: solve for weights with a feasibility LP
        target = np.asarray(rhs, dtype=object).astype(float)
        A_eq = np.vstack([orbit_f, np.ones((1, G.size))])
        b_eq = np.concatenate([target, [1.0]])
        res = optimize.linprog(np.zeros(G.size), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * G.size,
                               method="highs")
        if not res.success:
            failures.append({"trial": t, "kind": "delta->hull", "xi": xi.to_json()})
        # the extended action is a monoid action: alpha(xi zeta) = alpha(xi) alpha(zeta)
        a, b = (int(v) for v in rng.integers(G.size, size=2))
        w = Fraction(int(rng.integers(0, 4)), 3)
        zeta = GroupAlgebraElement(G, {a: w}) + GroupAlgebraElement(G, {b: 1 - w})
        if not np.array_equal(alpha.extended(convolve(xi, zeta), x), alpha.extended(xi, alpha.extended(zeta, x))):
            failures.append({"trial": t, "kind": "monoid", "xi": xi.to_json()})
    return HullReport(not failures, trials, failures)


# --------------------------------------------------------------------------
# finitely presented groups


_LETTER = re.compile(r"^[A-Za-z]$")


def _parse_word(word: str, symbols) -> list[tuple[int, int]]:
    out = []
    for ch in word.strip():
        if ch.isspace():
            continue
        if ch in symbols:
            out.append((symbols.index(ch), 1))
        elif ch.lower() in symbols and ch.isupper():
            out.append((symbols.index(ch.lower()), -1))
        elif ch == "1":
            continue
        else:
            raise AffineError(f"unknown letter {ch!r} in word {word!r}")
    return out


def free_reduce(word: list[tuple[int, int]]) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for letter in word:
        if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
            out.pop()
        else:
            out.append(letter)
    return out


class FpGroupPresentation:
    """Generators are lowercase letters; the capital letter is the inverse."""

    def __init__(self, generators, relators=()):
        gens = list(generators)
        for s in gens:
            if not isinstance(s, str) or not _LETTER.match(s) or not s.islower():
                raise AffineError(f"generator symbols must be single lowercase letters, got {s!r}")
        if len(set(gens)) != len(gens):
            raise AffineError("generator symbols must be distinct")
        self.generators = gens
        self.relators = [free_reduce(_parse_word(r, gens)) for r in relators]
        self.relator_text = list(relators)

    @classmethod
    def from_spec(cls, spec) -> "FpGroupPresentation":
        if spec.get("type", "fp") != "fp":
            raise AffineError("not an fp spec")
        return cls(spec["generators"], spec.get("relators", []))

    @property
    def rank(self) -> int:
        return len(self.generators)

    def word(self, text: str):
        return free_reduce(_parse_word(text, self.generators))

    def relator_exponents(self) -> np.ndarray:
        out = np.zeros((len(self.relators), self.rank), dtype=np.int64)
        for i, r in enumerate(self.relators):
            for s, e in r:
                out[i, s] += e
        return out


@dataclass
class Abelianization:
    free_rank: int
    torsion: tuple


def abelianization(P: FpGroupPresentation) -> Abelianization:
    """Z^k modulo the relator exponent rows, via the Smith normal form."""
    k = P.rank
    if not P.relators or k == 0:
        return Abelianization(k, ())
    factors = [int(f) for f in invariant_factors(Matrix(P.relator_exponents().tolist()), domain=ZZ)]
    nonzero = [f for f in factors if f != 0]
    torsion = tuple(abs(f) for f in nonzero if abs(f) > 1)
    return Abelianization(k - len(nonzero), torsion)


class FpModule:
    """Exact generator matrices whose relator products are the identity."""

    def __init__(self, presentation: FpGroupPresentation, matrices, p=2):
        self.presentation = presentation
        self.p = parse_p(p)
        mats = [exact.frac_array(m) for m in matrices]
        if len(mats) != presentation.rank:
            raise ModuleError("need one matrix per generator")
        d = mats[0].shape[0] if mats else 0
        for A in mats:
            if A.shape != (d, d):
                raise ModuleError("generator matrices must be square of a common size")
        self.dim = d
        self.matrices = mats
        try:
            self.inverses = [exact.inverse(A) for A in mats]
        except exact.SingularMatrixError:
            raise ModuleError("generator matrix is not invertible") from None
        for A in mats:
            if self.p == 2:
                if not np.array_equal(exact.matmul(A.T, A), exact.identity(d)):
                    raise ModuleError("generator matrix is not orthogonal (p = 2)")
            elif not _is_signed_permutation(A):
                raise ModuleError(f"generator matrix is not a signed permutation (p={p_str(self.p)})")
        for r, text in zip(presentation.relators, presentation.relator_text):
            if not np.array_equal(self.word_matrix(r), exact.identity(d)):
                raise ModuleError(f"relator {text!r} does not act trivially")
        self.embedding = None

    def letter_matrix(self, letter) -> np.ndarray:
        s, e = letter
        return self.matrices[s] if e > 0 else self.inverses[s]

    def word_matrix(self, word) -> np.ndarray:
        if isinstance(word, str):
            word = self.presentation.word(word)
        out = exact.identity(self.dim)
        for letter in word:
            out = exact.matmul(out, self.letter_matrix(letter))
        return out

    def norm(self, x) -> float:
        return lp_norm(np.asarray(x, dtype=object).astype(float), self.p)

    def word_jacobian(self, word) -> np.ndarray:
        """d x kd matrix J with phi(word) = J (v_1; ..; v_k)."""
        if isinstance(word, str):
            word = self.presentation.word(word)
        d, k = self.dim, self.presentation.rank
        J = exact.zeros((d, k * d))
        prefix = exact.identity(d)
        for s, e in word:
            block = prefix if e > 0 else -exact.matmul(prefix, self.inverses[s])
            J[:, s * d:(s + 1) * d] = J[:, s * d:(s + 1) * d] + block
            prefix = exact.matmul(prefix, self.letter_matrix((s, e)))
        return J


def fp_module_from_finite(P: FpGroupPresentation, M: BanachModule, images) -> FpModule:
    """Restrict a finite-group module along generator images s_i -> g_i."""
    return FpModule(P, [M.matrices[g] for g in images], M.p)


@dataclass
class FpCohomology:
    basis_Z: np.ndarray
    basis_B: np.ndarray
    dim_Z: int
    dim_B: int
    dim_H: int


def fp_cocycle_space(P: FpGroupPresentation, M: FpModule) -> FpCohomology:
    d, k = M.dim, P.rank
    if k * d == 0:
        z = exact.zeros((0, k * d))
        return FpCohomology(z, z, 0, 0, 0)
    if P.relators:
        system = np.vstack([M.word_jacobian(r) for r in P.relators])
        basis_Z = exact.nullspace(system)
    else:
        basis_Z = exact.identity(k * d)
    D = np.vstack([exact.identity(d) - A for A in M.matrices]) if d else exact.zeros((0, 0))
    basis_B = exact.column_space(D)
    if basis_B.shape[0] and P.relators and not exact.is_zero(exact.matmul(system, basis_B.T)):
        raise AssertionError("coboundaries fail the relator system")
    return FpCohomology(basis_Z, basis_B, basis_Z.shape[0], basis_B.shape[0],
                        basis_Z.shape[0] - basis_B.shape[0])


class FpAffineAction:
    """alpha(s_i) x = pi(s_i) x + v_i on a finitely presented group."""

    finite = False

    def __init__(self, module: FpModule, values):
        self.module = module
        vals = [exact.frac_array(v).reshape(module.dim) for v in values]
        if len(vals) != module.presentation.rank:
            raise AffineError("need one translation vector per generator")
        self.values = vals
        flat = np.concatenate(vals) if vals else exact.zeros(0)
        for r, text in zip(module.presentation.relators, module.presentation.relator_text):
            if not exact.is_zero(exact.matmul(module.word_jacobian(r), flat)):
                raise AffineError(f"values violate relator {text!r}")
        self._flat = flat

    def word_value(self, word) -> tuple[np.ndarray, np.ndarray]:
        return self.module.word_matrix(word), exact.matmul(self.module.word_jacobian(word), self._flat)

    def __call__(self, word, x) -> np.ndarray:
        A, b = self.word_value(word)
        return exact.matmul(A, np.asarray(x, dtype=object)) + b

    def generator_system(self):
        return list(zip(self.module.matrices, self.values))

    def displacement_terms(self, words):
        return [self.word_value(w) for w in words]


def homomorphism_free_injectivity(P: FpGroupPresentation, M: FpModule) -> dict:
    """Kernel of phi -> phi-bar on Z^1 (values taken modulo the common fixed space)."""
    ab = abelianization(P)
    d, k = M.dim, P.rank
    fixed = exact.nullspace(np.vstack([exact.identity(d) - A for A in M.matrices])) if d else exact.zeros((0, 0))
    Z = fp_cocycle_space(P, M).basis_Z
    if fixed.shape[0] == 0 or Z.shape[0] == 0:
        kernel_dim = 0
    else:
        # orthogonal projection onto the complement of the fixed space; all
        # admissible isometries are orthogonal so this complement is invariant
        F = fixed.T
        proj = exact.identity(d) - exact.matmul(exact.matmul(F, exact.inverse(exact.matmul(F.T, F))), F.T)
        blocks = np.zeros((k * d, k * d), dtype=object)
        blocks[...] = Fraction(0)
        for i in range(k):
            blocks[i * d:(i + 1) * d, i * d:(i + 1) * d] = proj
        images = exact.matmul(blocks, Z.T)          # columns = images of basis cocycles
        kernel_dim = exact.nullspace(images).shape[0] if images.size else 0
    trivial = FpModule(P, [exact.identity(1)] * k, 2)
    return {"abelian_free_rank": ab.free_rank, "torsion": list(ab.torsion),
            "trivial_H1": fp_cocycle_space(P, trivial).dim_H, "kernel_dim": kernel_dim,
            "injective": kernel_dim == 0}


# --------------------------------------------------------------------------
# appendix checks on finite groups


@dataclass
class DisplacementReport:
    samples: int
    ok: bool
    exact: bool
    worst_ratio_low: float
    worst_ratio_high: float
    failures: list = field(default_factory=list)


def _random_vector(rng, d):
    return np.array([Fraction(int(a), int(b)) for a, b in zip(rng.integers(-5, 6, size=d),
                                                              rng.integers(1, 5, size=d))], dtype=object)


def quotient_displacement_check(M: BanachModule, samples: int = 1000, rng=None, tol: float = 1e-9,
                                cocycles=None) -> DisplacementReport:
    """1/2 ||x - pi(g) x|| <= ||xbar - pibar(g) xbar|| <= ||x - pi(g) x||, and the same for phi(g)."""
    rng = rng if rng is not None else np.random.default_rng(0)
    Q = quotient_module(M)
    G = M.group
    exact_mode = M.p == 2
    failures = []
    lo_ratio, hi_ratio = math.inf, 0.0

    def check(y, label):
        nonlocal lo_ratio, hi_ratio
        if exact_mode:
            full = M.norm_sq_exact(y)
            q = Q.norm_sq_exact(y)
            ok = full <= 4 * q and q <= full
            if full:
                lo_ratio = min(lo_ratio, math.sqrt(q / full))
                hi_ratio = max(hi_ratio, math.sqrt(q / full))
        else:
            full = M.norm(y)
            q = Q.norm(y)
            ok = 0.5 * full <= q + tol and q <= full + tol
            if full:
                lo_ratio = min(lo_ratio, q / full)
                hi_ratio = max(hi_ratio, q / full)
        if not ok:
            failures.append(label)

    for t in range(samples):
        x = _random_vector(rng, M.dim)
        g = int(rng.integers(G.size))
        y = x - exact.matmul(M.matrices[g], x)
        # the class of x - pi(g) x is xbar - pibar(g) xbar
        check(y, {"x": [exact.fraction_str(v) for v in x], "g": g})
    for phi in cocycles or []:
        for g in G.elements:
            check(phi.values[g], {"cocycle": True, "g": g})
    if lo_ratio == math.inf:
        lo_ratio = 1.0
    return DisplacementReport(samples, not failures, exact_mode, lo_ratio, hi_ratio, failures[:1])


@dataclass
class GuichardetReport:
    ok: bool
    quotient_dim: int
    norm_bound: float
    dim_B1: int
    dim_closure_B1: int
    detail: dict = field(default_factory=dict)


def guichardet_criterion(M: BanachModule) -> GuichardetReport:
    """B^1 closed (automatic in finite dimensions) together with a certified
    gap ||pibar(uniform)|| < 1 on X / X^G."""
    G = M.group
    Q = quotient_module(M)
    dim_B1 = cohomology(M, 1, with_bases=False).dim_B
    if Q.quotient_dim == 0:
        return GuichardetReport(True, 0, 0.0, dim_B1, dim_B1, {"vacuous": True})
    avg = uniform_average(G, G.elements)
    A = sum((t * Q.quotient_action[g] for g, t in avg.coeffs.items()), exact.zeros((Q.quotient_dim,) * 2))
    # averaging maps X into X^G, so on the quotient it is exactly zero
    bound = 0.0 if exact.is_zero(A) else math.inf
    fixed_q = _quotient_fixed_dim(Q)
    if fixed_space(M, G.whole().generators()).shape[0] + Q.quotient_dim != M.dim:
        raise AssertionError("quotient dimension mismatch")
    return GuichardetReport(bound < 1 and fixed_q == 0, Q.quotient_dim, bound, dim_B1, dim_B1,
                            {"quotient_fixed_dim": fixed_q})


def _quotient_fixed_dim(Q: QuotientModule) -> int:
    if Q.quotient_dim == 0:
        return 0
    G = Q.base.group
    blocks = [exact.identity(Q.quotient_dim) - Q.quotient_action[g] for g in G.whole().generators()]
    return exact.nullspace(np.vstack(blocks)).shape[0] if blocks else Q.quotient_dim
