import math
from fractions import Fraction

import numpy as np
import pytest

from cochain_lab import exact
from cochain_lab.algebra import GroupAlgebraElement, class_average, uniform_average
from cochain_lab.cochains import (Cochain, apply_coboundary, cohomology, in_coboundaries, random_cocycle,
                                  restriction)
from cochain_lab.groups import cyclic_group, f_conjugacy_classes
from cochain_lab.homotopy import (BudgetExhausted, HomotopyOperator, SplittingError, almost_coboundary_witness,
                                  contracting_homotopy, find_contracting_pair, generator_average_decay,
                                  invert_one_minus, neumann_residuals, nowak_projection, r_xi,
                                  restriction_nullifier, shrinking_average, verify_homotopy_identity)
from cochain_lab.modules import StrictConvexityWarning, apply_algebra, build_module, module_operator_norm
from cochain_lab.samples import (GROUP_NAMES, order3_subgroup_of_S3, regular_module, rotation_module,
                                 sample_group, trivial_module)


def half_step(G, g):
    return GroupAlgebraElement(G, {G.identity: Fraction(1, 2), g: Fraction(1, 2)})


# ---------------------------------------------------------------- R_xi and inverses

def test_r_xi_examples(rng):
    M = rotation_module("S3")
    G = M.group
    phi = Cochain.random(M, 1, rng)
    for g in G.elements:
        assert np.array_equal(r_xi(phi, GroupAlgebraElement.delta(G, g)), phi(g))
    xi = uniform_average(G, [0, 2, 3])
    x = Cochain.random(M, 0, rng)
    assert np.array_equal(r_xi(apply_coboundary(x), xi), x() - exact.matmul(apply_algebra(M, xi), x()))
    assert exact.is_zero(r_xi(Cochain.zero(M, 1), xi))


def test_invert_one_minus_examples():
    M = rotation_module("Z4")
    G = M.group
    with pytest.raises(SplittingError):
        invert_one_minus(M, GroupAlgebraElement.delta(G, 0))
    assert np.array_equal(invert_one_minus(M, uniform_average(G, G.elements)).matrix, exact.identity(2))
    comp = build_module(sample_group("Z2"), {"kind": "regular", "part": "complement"}, p=2)
    assert np.array_equal(invert_one_minus(comp, half_step(comp.group, 1)).matrix, exact.identity(1))


def test_neumann_series():
    M = rotation_module("Z4")
    xi = half_step(M.group, 1)
    direct = invert_one_minus(M, xi).matrix.astype(float)
    neu = invert_one_minus(M, xi, method="neumann", tol=1e-12)
    assert neu.norm_bound == pytest.approx(1 / math.sqrt(2))
    # q^(k+1)/(1-q) <= tol with q = 1/sqrt 2
    assert neu.terms == math.ceil(math.log(1e-12 * (1 - 1 / math.sqrt(2))) / math.log(1 / math.sqrt(2))) - 1
    assert np.abs(neu.matrix - direct).max() <= neu.residual_bound
    res = neumann_residuals(M, xi, 30)
    assert all(b <= a + 1e-15 for a, b in zip(res, res[1:]))
    assert res[-1] < 1e-4
    with pytest.raises(SplittingError):
        invert_one_minus(M, xi, method="neumann", k_max=5)


# ---------------------------------------------------------------- Nowak projection

def test_projection_z4_dimensions():
    M = rotation_module("Z4")
    rep = nowak_projection(M, uniform_average(M.group, M.group.elements))
    assert rep.dims == {"C1": 8, "B1": 2, "ker_R": 6}
    assert rep.idempotency_residual == 0


def test_projection_trivial_group():
    G = cyclic_group(1)
    M = build_module(G, {"kind": "regular", "part": "complement"}, p=2)
    rep = nowak_projection(M, GroupAlgebraElement.delta(G, 0))
    assert rep.dims == {"C1": 0, "B1": 0, "ker_R": 0}


@pytest.mark.parametrize("name", GROUP_NAMES)
def test_projection_all_rotation_modules(name):
    M = rotation_module(name)
    G = M.group
    cd = f_conjugacy_classes(G, G.whole())
    xis = [uniform_average(G, G.elements)] + [half_step(G, g) for g in G.elements if g != G.identity]
    xis += [class_average(cd, i) for i in range(len(cd.classes))]
    done = 0
    for xi in xis:
        try:
            rep = nowak_projection(M, xi)
        except SplittingError:
            continue      # I - pi(xi) singular: xi not admissible
        P = rep.projector_onto_B
        assert np.array_equal(exact.matmul(P, P), P)
        assert rep.dims["C1"] == rep.dims["B1"] + rep.dims["ker_R"]
        done += 1
    assert done >= 1


def test_projection_kernel_is_ker_r(rng):
    M = rotation_module("D8")
    xi = uniform_average(M.group, M.group.elements)
    P = nowak_projection(M, xi).projector_onto_B
    for _ in range(10):
        phi = Cochain.random(M, 1, rng)
        Pphi = Cochain.from_flat(M, 1, exact.matmul(P, phi.flat()))
        # P phi is a coboundary and phi - P phi has vanishing extension at xi
        assert in_coboundaries(M, Pphi) is not None
        assert exact.is_zero(r_xi(phi - Pphi, xi))


# ---------------------------------------------------------------- homotopy R

def test_homotopy_identity_s3_order3_involution_class():
    M = rotation_module("S3")
    G = M.group
    F = order3_subgroup_of_S3()
    cd = f_conjugacy_classes(G, F)
    inv_class = [i for i, c in enumerate(cd.classes) if len(c) == 3][0]
    rep = verify_homotopy_identity(M, class_average(cd, inv_class), F, [0, 1, 2], trials=20,
                                   rng=np.random.default_rng(1))
    assert rep.ok and rep.residual == 0


def test_homotopy_identity_dirac_at_identity(rng):
    M = regular_module("Z3")
    H = HomotopyOperator(M, GroupAlgebraElement.delta(M.group, 0))
    for n in range(3):
        phi = Cochain.random(M, n, rng)
        assert H.S(phi) == H.T(phi)
        assert H.residual(phi).is_zero()


def test_homotopy_rejects_non_commuting_xi():
    M = rotation_module("S3")
    G = M.group
    t = G.index_of((1, 0, 2))
    with pytest.raises(SplittingError):
        HomotopyOperator(M, half_step(G, t), G.whole())


def test_homotopy_float_mode_small_residual(rng):
    M = rotation_module("D8")
    H = HomotopyOperator(M, uniform_average(M.group, M.group.elements))
    phi = Cochain(M, 2, Cochain.random(M, 2, rng).values.astype(float))
    assert np.abs(H.residual(phi).values).max() < 1e-12


# ---------------------------------------------------------------- contracting homotopy

def test_contracting_homotopy_z3_complement():
    M = rotation_module("Z3")
    K = contracting_homotopy(M, uniform_average(M.group, M.group.elements))
    assert K.verify([0, 1, 2, 3]) == {0: None, 1: None, 2: None, 3: None}


def test_contracting_homotopy_trivial_rep_fails():
    M = trivial_module("Z3")
    with pytest.raises(SplittingError):
        contracting_homotopy(M, uniform_average(M.group, M.group.elements))


def test_contracting_homotopy_non_uniform_central_xi(rng):
    M = rotation_module("Z4")
    K = contracting_homotopy(M, half_step(M.group, 1))
    assert all(v is None for v in K.verify([0, 1, 2]).values())
    for n in (1, 2):
        P = K.splitting_projector(n)
        assert P.matmul(P).to_dense().tolist() == P.to_dense().tolist()
        phi = Cochain.random(M, n, rng)
        # phi = d K phi + K d phi
        lhs = apply_coboundary(K.apply(phi)) + K.apply(apply_coboundary(phi))
        assert lhs == phi


# ---------------------------------------------------------------- pairs and restriction

def test_contracting_pair_s3():
    M = rotation_module("S3")
    pair = find_contracting_pair(M, order3_subgroup_of_S3())
    assert pair.norm_bound < 1
    lo, up = module_operator_norm(M, apply_algebra(M, pair.product))
    assert up < 1
    with pytest.raises(SplittingError):
        find_contracting_pair(trivial_module("S3"), order3_subgroup_of_S3())


def test_restriction_nullifier_matches_exact_primitive(rng):
    for name in ("S3", "D8", "Z6"):
        M = rotation_module(name)
        G = M.group
        rep = cohomology(M, 1, with_bases=True)
        phi = random_cocycle(M, 1, rng, rep.basis_Z)
        psi = restriction_nullifier(phi, G.whole(), uniform_average(G, G.elements))
        prim = in_coboundaries(M, phi)
        # X^G = 0 makes d on C^0 injective, so the primitive is unique
        assert np.array_equal(psi.values, prim.values)


def test_restriction_nullifier_on_coboundaries(rng):
    M = rotation_module("S3")
    F = order3_subgroup_of_S3()
    chi = Cochain.random(M, 1, rng)
    phi = apply_coboundary(chi)
    # (1,1,1) is fixed by the 3-cycles, so average over all of G
    psi = restriction_nullifier(phi, F, uniform_average(M.group, M.group.elements))
    assert apply_coboundary(psi) == apply_coboundary(restriction(chi, F))
    # psi and chi|F differ by a cocycle on F
    assert apply_coboundary(psi - restriction(chi, F)).is_zero()


# ---------------------------------------------------------------- approximation

def test_shrinking_single_uniform_generator(rng):
    M = rotation_module("S3")
    G = M.group
    x = exact.frac_array(rng.integers(-3, 4, size=M.dim))
    res = shrinking_average(M, [uniform_average(G, G.elements)], [x], 1e-6)
    assert res.steps == 1 and res.bounds == [0.0] and res.certified


def test_shrinking_geometric_steps():
    M = rotation_module("Z4")
    x = exact.frac_array([3, 1])
    res = shrinking_average(M, [half_step(M.group, 1)], [x], 1e-6)
    # pi(1/2 e + 1/2 g) is 1/sqrt2 times a rotation: the norm drops by exactly 1/sqrt2 per step
    expected = math.ceil(math.log(math.sqrt(10) / 1e-6) / math.log(math.sqrt(2)))
    assert res.steps == expected
    assert res.certified and res.best_bound < 1e-6


def test_shrinking_several_vectors(rng):
    M = rotation_module("D8")
    G = M.group
    gens = [half_step(G, g) for g in (1, 2)]
    E = [exact.frac_array(rng.integers(-5, 6, size=M.dim)) for _ in range(3)]
    res = shrinking_average(M, gens, E, 1e-6)
    P = apply_algebra(M, res.xi)
    for x in E:
        assert M.norm_sq_exact(exact.matmul(P, x)) < Fraction(1, 10 ** 12)


def test_shrinking_budget_exhausted():
    M = rotation_module("Z4")
    with pytest.raises(BudgetExhausted) as info:
        shrinking_average(M, [half_step(M.group, 1)], [exact.frac_array([1, 0])], 1e-6, max_steps=5)
    assert info.value.best_bound == pytest.approx(2 ** -2.5, rel=1e-9)


def test_shrinking_certification_depends_on_p(rng):
    x = exact.frac_array([2, -1])
    for p, cert in (("3", True), ("3/2", False)):
        M = rotation_module("Z4", p)
        res = shrinking_average(M, [half_step(M.group, 1), half_step(M.group, 3)], [x], 1e-6)
        assert res.certified is cert and res.best_bound < 1e-6


def test_shrinking_refuses_non_strictly_convex():
    M = rotation_module("Z4", "1")
    with pytest.raises(SplittingError):
        shrinking_average(M, [half_step(M.group, 1)], [exact.frac_array([1, 0])], 1e-3)
    with pytest.warns(StrictConvexityWarning):
        shrinking_average(M, [uniform_average(M.group, M.group.elements)], [exact.frac_array([1, 0])], 1e-3,
                          force=True)


def test_shrinking_rejects_common_fixed_vector():
    M = rotation_module("D8")
    G = M.group
    s = G.index_of((0, 3, 2, 1))
    with pytest.raises(SplittingError):
        shrinking_average(M, [half_step(G, s)], [exact.frac_array([1, 0])], 1e-6)


def test_almost_coboundary_witness(rng):
    M = rotation_module("S3")
    F = order3_subgroup_of_S3()
    rep = cohomology(M, 2, with_bases=True)
    phi = random_cocycle(M, 2, rng, rep.basis_Z)
    E = [(a, b) for a in F.elements for b in F.elements]
    w = almost_coboundary_witness(phi, F, E, 1e-6)
    assert w.certified and w.sup_bound < 1e-6
    assert apply_coboundary(w.primitive) == w.psi
    zero = almost_coboundary_witness(Cochain.zero(M, 2), F, E, 1e-6)
    assert zero.sup_bound == 0.0


def test_almost_coboundary_witness_budget(rng):
    M = rotation_module("Z4")
    rep = cohomology(M, 1, with_bases=True)
    phi = random_cocycle(M, 1, rng, rep.basis_Z)
    while phi.is_zero():
        phi = random_cocycle(M, 1, rng, rep.basis_Z)
    with pytest.raises(BudgetExhausted) as info:
        almost_coboundary_witness(phi, M.group.whole(), [(1,)], 1e-6, max_steps=0)
    assert info.value.best_bound == pytest.approx(M.norm(phi(1)))


def test_generator_average_decay_full_set(rng):
    M = rotation_module("A4")
    G = M.group
    rep = cohomology(M, 1, with_bases=True)
    phi = random_cocycle(M, 1, rng, rep.basis_Z)
    res = generator_average_decay(phi, G.elements, 1e-6)
    assert res.power == 1 and res.bound == 0.0 and res.certified


def test_generator_average_decay_geometric(rng):
    M = rotation_module("Z4")
    y = Cochain.random(M, 0, rng)
    phi = apply_coboundary(y)
    res = generator_average_decay(phi, [1], 1e-6)
    assert res.power > 1 and res.bound < 1e-6 and res.certified
    # x approximates the primitive y: the error is pi(xi) y
    err = res.x - y()
    assert math.sqrt(M.norm_sq_exact(err)) <= 2 * math.sqrt(M.norm_sq_exact(y())) * 2 ** (-res.power / 2) + 1e-12
