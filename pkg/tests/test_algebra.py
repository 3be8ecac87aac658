from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cochain_lab.algebra import (AlgebraError, GroupAlgebraElement, class_average, class_sum, classify,
                                 commutant_basis, commutation_system, in_simplex, uniform_average)
from cochain_lab.groups import f_conjugacy_classes
from cochain_lab.samples import GROUP_NAMES, order3_subgroup_of_S3, proper_subgroups, sample_group

coef = st.builds(Fraction, st.integers(-5, 5), st.integers(1, 4))


def element(G):
    return st.lists(coef, min_size=G.size, max_size=G.size).map(lambda v: GroupAlgebraElement.from_vector(G, v))


def brute_convolution(xi, zeta):
    """(xi * zeta)(h) = sum_g xi(g) zeta(g^-1 h), evaluated pointwise."""
    G = xi.group
    out = []
    for h in G.elements:
        out.append(sum((xi[g] * zeta[int(G.mul[G.inv[g], h])] for g in G.elements), Fraction(0)))
    return out


def test_delta_products():
    G = sample_group("S3")
    for g in G.elements:
        for f in G.elements:
            d = GroupAlgebraElement.delta(G, g) * GroupAlgebraElement.delta(G, f)
            assert d == GroupAlgebraElement.delta(G, int(G.mul[g, f]))


def test_half_half_idempotent_in_z2():
    G = sample_group("Z2")
    xi = GroupAlgebraElement(G, {0: Fraction(1, 2), 1: Fraction(1, 2)})
    assert xi * xi == xi


@given(st.sampled_from(["S3", "D8", "Z6"]).flatmap(lambda n: st.tuples(element(sample_group(n)),
                                                                        element(sample_group(n)),
                                                                        element(sample_group(n)))))
def test_convolution_properties(triple):
    a, b, c = triple
    assert list((a * b).vector()) == brute_convolution(a, b)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a * b).augmentation() == a.augmentation() * b.augmentation()


def test_classification_examples():
    G = sample_group("Z3")
    x = GroupAlgebraElement(G, {0: 3, 1: -2})
    c = classify(x)
    assert c.augmentation_value == 1 and c.in_affine_space and not c.in_simplex
    y = GroupAlgebraElement(G, {0: 1, 1: -1})
    assert classify(y).in_augmentation_ideal
    assert in_simplex(uniform_average(G, [0, 1, 2]))


def test_class_average_examples():
    G = sample_group("S3")
    cd = f_conjugacy_classes(G, G.whole())
    for i, cl in enumerate(cd.classes):
        avg = class_average(cd, i)
        assert all(avg[h] == Fraction(1, len(cl)) for h in cl)
        if len(cl) == 1:
            assert avg == GroupAlgebraElement.delta(G, cl[0])
        for f in G.elements:
            df = GroupAlgebraElement.delta(G, f)
            dfi = GroupAlgebraElement.delta(G, int(G.inv[f]))
            assert df * class_sum(cd, i) * dfi == class_sum(cd, i)
    with pytest.raises(AlgebraError):
        class_average(cd, 17)


def test_uniform_average_examples():
    G = sample_group("Z3")
    assert uniform_average(G, [0]) == GroupAlgebraElement.delta(G, 0)
    u = uniform_average(G, G.elements)
    assert all(u[g] == Fraction(1, 3) for g in G.elements)
    assert u * u == u
    with pytest.raises(AlgebraError):
        uniform_average(G, [])


def _kernel_by_sympy(G, F):
    import sympy
    A = commutation_system(G, F)
    if A.shape[0] == 0:
        return G.size
    return len(sympy.Matrix(A.tolist()).nullspace())


def _all_subgroup_pairs():
    for name in GROUP_NAMES:
        G = sample_group(name)
        yield name, G.whole()
        yield name, G.trivial_subgroup()
        for H in proper_subgroups(name):
            yield name, H


@pytest.mark.parametrize("name,F", list(_all_subgroup_pairs()),
                         ids=lambda v: v if isinstance(v, str) else f"F{len(v.elements)}")
def test_commutant_basis_all_sample_pairs(name, F):
    G = sample_group(name)
    cb = commutant_basis(G, F)
    assert cb.kernel_dim == _kernel_by_sympy(G, F)
    assert cb.kernel_dim == len(f_conjugacy_classes(G, F).classes)


def test_commutant_examples():
    G = sample_group("S3")
    cb = commutant_basis(G, G.whole())
    assert cb.kernel_dim == 3
    assert sorted(len(b.support) for b in cb.basis) == [1, 2, 3]
    A = sample_group("Z6")
    assert commutant_basis(A, A.whole()).kernel_dim == 6
    assert commutant_basis(G, G.trivial_subgroup()).kernel_dim == 6
    cb3 = commutant_basis(G, order3_subgroup_of_S3())
    assert cb3.kernel_dim == 4


def test_json_round_trip():
    G = sample_group("D8")
    x = GroupAlgebraElement(G, {0: Fraction(1, 3), 5: Fraction(-2, 7)})
    assert GroupAlgebraElement.from_json(G, x.to_json()) == x


def test_zero_coefficients_dropped():
    G = sample_group("Z4")
    x = GroupAlgebraElement(G, {0: 1, 1: 0})
    assert x.support == (0,)
    assert (x - x).support == ()
