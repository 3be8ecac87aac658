import itertools

import pytest
from hypothesis import given, strategies as st
from sympy.combinatorics import Permutation, PermutationGroup

from cochain_lab.groups import (GroupError, build_group, centralizer, cyclic_group, direct_product,
                                f_conjugacy_classes, fc_data, subgroup_closure, symmetrize, word_length,
                                word_lengths)
from cochain_lab.samples import GROUP_NAMES, order3_subgroup_of_S3, sample_group


def test_z2_table():
    G = build_group({"type": "table", "mul": [[0, 1], [1, 0]]})
    assert G.size == 2 and G.identity == 0 and list(G.inv) == [0, 1]


def test_permutation_closure_against_brute_force():
    G = build_group({"type": "permutation", "degree": 3, "generators": [[1, 0, 2], [1, 2, 0]]})
    assert G.size == 6
    assert sorted(G.labels) == sorted(itertools.permutations(range(3)))


def test_no_identity_rejected():
    with pytest.raises(GroupError):
        build_group({"type": "table", "mul": [[0, 1], [0, 1]]})


def test_non_associative_rejected():
    # a Latin square with identity 0 that is not associative (order 5 loop)
    mul = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(GroupError):
        build_group(table=mul)


def test_mismatched_degree_rejected():
    with pytest.raises(GroupError):
        build_group(generators=[[1, 0, 2], [1, 0]])


def test_size_cap():
    with pytest.raises(GroupError):
        build_group(generators=[[1, 2, 3, 4, 0], [1, 0, 2, 3, 4]], size_cap=64)   # S5, order 120


def test_subgroup_closure_examples():
    G = sample_group("S3")
    three = G.index_of((1, 2, 0))
    assert subgroup_closure(G, [three]).order == 3
    assert subgroup_closure(G, []).elements == (G.identity,)
    assert subgroup_closure(G, list(G.elements)).order == 6


def _sympy_classes(G, F):
    """F-conjugacy classes via sympy permutations (independent oracle)."""
    perms = {g: Permutation(list(G.labels[g])) for g in G.elements}
    index = {tuple(p.array_form): g for g, p in perms.items()}
    out = set()
    for g in G.elements:
        orbit = frozenset(index[tuple((perms[f] * perms[g] * ~perms[f]).array_form)] for f in F.elements)
        out.add(orbit)
    return out


@pytest.mark.parametrize("name", ["S3", "D8", "A4"])
def test_conjugacy_classes_match_sympy(name):
    G = sample_group(name)
    cd = f_conjugacy_classes(G, G.whole())
    assert {frozenset(c) for c in cd.classes} == _sympy_classes(G, G.whole())
    pg = PermutationGroup([Permutation(list(G.labels[g])) for g in G.whole().generators()])
    assert sorted(cd.sizes()) == sorted(len(c) for c in pg.conjugacy_classes())


def test_s3_class_examples():
    G = sample_group("S3")
    assert sorted(f_conjugacy_classes(G, G.whole()).sizes()) == [1, 2, 3]
    F = order3_subgroup_of_S3()
    cd = f_conjugacy_classes(G, F)
    assert sorted(cd.sizes()) == [1, 1, 1, 3]
    inv_class = [c for c in cd.classes if len(c) == 3][0]
    assert all(G.element_order(g) == 2 for g in inv_class)
    assert {frozenset(c) for c in cd.classes} == _sympy_classes(G, F)


def test_trivial_acting_subgroup_gives_singletons():
    G = sample_group("A4")
    assert all(len(c) == 1 for c in f_conjugacy_classes(G, G.trivial_subgroup()).classes)


@pytest.mark.parametrize("name", GROUP_NAMES)
def test_fc_data_and_orbit_stabilizer(name):
    G = sample_group(name)
    for F in [G.whole(), G.trivial_subgroup()] + [subgroup_closure(G, [g]) for g in G.elements]:
        fc, idx = fc_data(G, F)
        assert fc.order == G.size
        cd = f_conjugacy_classes(G, F)
        for g in G.elements:
            assert len(cd.classes[cd.class_of[g]]) * centralizer(G, F, g).order == F.order
            assert idx[g] == len(cd.classes[cd.class_of[g]])
        # closure of the returned subgroup, checked directly
        s = set(fc.elements)
        assert all(int(G.mul[a, b]) in s and int(G.inv[a]) in s for a in s for b in s)
        # recomputation gives the identical partition
        assert f_conjugacy_classes(G, F) == cd
        if G.is_abelian():
            assert set(idx.values()) == {1}


def test_involution_centralizer_index():
    G = sample_group("S3")
    _, idx = fc_data(G, G.whole())
    t = G.index_of((1, 0, 2))
    assert idx[t] == 3


def test_word_length_examples():
    G = cyclic_group(5)
    assert word_length(G, [1, 4], 2) == 2
    assert word_length(G, [1], 0) == 0
    H = cyclic_group(6)
    with pytest.raises(GroupError):
        word_length(H, [2], 1)


def test_word_length_bfs_oracle():
    # cyclic group: distance is min(k, m - k) for generator +-1
    G = cyclic_group(9)
    d = word_lengths(G, [1])
    assert all(d[k] == min(k, 9 - k) for k in range(9))


@given(st.sampled_from(GROUP_NAMES), st.data())
def test_word_length_triangle_inequality(name, data):
    G = sample_group(name)
    sigma = symmetrize(G, G.whole().generators())
    d = word_lengths(G, sigma)
    g = data.draw(st.sampled_from(list(G.elements)))
    h = data.draw(st.sampled_from(list(G.elements)))
    assert d[int(G.mul[g, h])] <= d[g] + d[h]


def test_direct_product_indexing():
    A, B = cyclic_group(2), cyclic_group(3)
    P = direct_product(A, B)
    assert P.size == 6 and P.is_abelian()
    assert P.labels[1 * 3 + 2] == (1, 2)
    assert P.element_order(1 * 3 + 1) == 6


def test_subgroup_validation():
    from cochain_lab.groups import Subgroup
    G = sample_group("S3")
    with pytest.raises(GroupError):
        Subgroup(G, (0, G.index_of((1, 0, 2)), G.index_of((0, 2, 1))))
    F = order3_subgroup_of_S3()
    assert F.is_normal()
    assert not subgroup_closure(G, [G.index_of((1, 0, 2))]).is_normal()
