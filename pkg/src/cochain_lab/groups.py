"""Finite groups as multiplication tables.

Elements are dense indices ``0..N-1``.  Everything downstream (cochains,
representations, the group algebra) indexes through ``mul`` and ``inv``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DEFAULT_SIZE_CAP = 64


class GroupError(ValueError):
    pass


class FiniteGroup:
    """A validated finite group.

    ``mul[a, b]`` is the index of ``a*b``.  ``labels`` optionally records
    where the elements came from (permutation tuples, pairs for products).
    """

    def __init__(self, mul, labels=None, name: str = "", size_cap: int = DEFAULT_SIZE_CAP):
        mul = np.asarray(mul, dtype=np.int64)
        if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
            raise GroupError("multiplication table must be a nonempty square array")
        n = mul.shape[0]
        if n > size_cap:
            raise GroupError(f"group order {n} exceeds size cap {size_cap}")
        if mul.min() < 0 or mul.max() >= n:
            raise GroupError("table entries must lie in 0..N-1")
        ar = np.arange(n)
        ids = [e for e in range(n) if np.array_equal(mul[e], ar) and np.array_equal(mul[:, e], ar)]
        if not ids:
            raise GroupError("no two-sided identity")
        e = ids[0]
        # mul[mul[a,b], c] == mul[a, mul[b,c]]
        if not np.array_equal(mul[mul, :], mul[:, mul]):
            raise GroupError("table is not associative")
        inv = np.full(n, -1, dtype=np.int64)
        for a in range(n):
            hits = np.nonzero(mul[a] == e)[0]
            if len(hits) == 0 or mul[hits[0], a] != e:
                raise GroupError(f"element {a} has no inverse")
            inv[a] = hits[0]
        mul.setflags(write=False)
        inv.setflags(write=False)
        self.mul = mul
        self.inv = inv
        self.identity = int(e)
        self.labels = list(labels) if labels is not None else list(range(n))
        self.name = name

    @property
    def size(self) -> int:
        return self.mul.shape[0]

    order = size

    def __len__(self):
        return self.size

    def __repr__(self):
        nm = f" {self.name}" if self.name else ""
        return f"<FiniteGroup{nm} of order {self.size}>"

    @property
    def elements(self) -> range:
        return range(self.size)

    def product(self, *elts: int) -> int:
        out = self.identity
        for g in elts:
            out = int(self.mul[out, g])
        return out

    def power(self, g: int, k: int) -> int:
        if k < 0:
            g, k = int(self.inv[g]), -k
        out = self.identity
        for _ in range(k):
            out = int(self.mul[out, g])
        return out

    def element_order(self, g: int) -> int:
        k, h = 1, g
        while h != self.identity:
            h = int(self.mul[h, g])
            k += 1
        return k

    def conjugate(self, f: int, g: int) -> int:
        """f g f^-1"""
        return int(self.mul[self.mul[f, g], self.inv[f]])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def whole(self) -> "Subgroup":
        return Subgroup(self, tuple(range(self.size)))

    def trivial_subgroup(self) -> "Subgroup":
        return Subgroup(self, (self.identity,))

    def index_of(self, label) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup = field(repr=False)
    elements: tuple

    def __post_init__(self):
        els = tuple(sorted(set(int(x) for x in self.elements)))
        object.__setattr__(self, "elements", els)
        G = self.parent
        s = frozenset(els)
        object.__setattr__(self, "_members", s)
        if G.identity not in s:
            raise GroupError("subgroup must contain the identity")
        for a in els:
            if int(G.inv[a]) not in s:
                raise GroupError("subgroup not closed under inverses")
            for b in els:
                if int(G.mul[a, b]) not in s:
                    raise GroupError("subgroup not closed under products")

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self._members

    def __iter__(self):
        return iter(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def position(self, g: int) -> int:
        return self.elements.index(g)

    def generators(self) -> list[int]:
        """A small generating set, chosen greedily in index order."""
        gens: list[int] = []
        current = {self.parent.identity}
        for g in self.elements:
            if g not in current:
                gens.append(g)
                current = set(subgroup_closure(self.parent, gens).elements)
        return gens

    def as_group(self) -> FiniteGroup:
        """The subgroup as a standalone group; element i is ``self.elements[i]``."""
        pos = {g: i for i, g in enumerate(self.elements)}
        n = len(self.elements)
        table = np.empty((n, n), dtype=np.int64)
        for i, a in enumerate(self.elements):
            for j, b in enumerate(self.elements):
                table[i, j] = pos[int(self.parent.mul[a, b])]
        labels = [self.parent.labels[g] for g in self.elements]
        return FiniteGroup(table, labels=labels, size_cap=max(n, DEFAULT_SIZE_CAP))

    def is_normal(self) -> bool:
        G = self.parent
        s = self._members
        return all(G.conjugate(f, h) in s for f in G.elements for h in self.elements)


@dataclass(frozen=True)
class ConjugacyData:
    """Partition of G into F-conjugacy classes ``{f g f^-1 : f in F}``."""

    acting: Subgroup
    classes: tuple
    class_of: tuple

    @property
    def group(self) -> FiniteGroup:
        return self.acting.parent

    def sizes(self) -> list[int]:
        return [len(c) for c in self.classes]


# --------------------------------------------------------------------------


def _compose(p: Sequence[int], q: Sequence[int]) -> tuple:
    """(p*q)(x) = p(q(x))"""
    return tuple(p[x] for x in q)


def build_group(spec=None, *, table=None, generators=None, degree=None, name="",
                size_cap: int = DEFAULT_SIZE_CAP) -> FiniteGroup:
    """Build a group from a multiplication table or permutation generators.

    ``spec`` may be the JSON-style dict ``{"type": "table", "mul": ...}`` or
    ``{"type": "permutation", "degree": k, "generators": [...]}``.
    Permutations are image sequences and compose right to left.
    """
    if spec is not None:
        kind = spec.get("type")
        if kind == "table":
            table = spec["mul"]
        elif kind == "permutation":
            generators = spec["generators"]
            degree = spec.get("degree")
        else:
            raise GroupError(f"unknown group spec type {kind!r}")
        name = spec.get("name", name)
    if table is not None:
        return FiniteGroup(table, name=name, size_cap=size_cap)
    if generators is None:
        raise GroupError("need a table or permutation generators")
    gens = [tuple(int(x) for x in g) for g in generators]
    if degree is None:
        degree = len(gens[0]) if gens else 1
    for g in gens:
        if len(g) != degree:
            raise GroupError(f"generator {g} has degree {len(g)}, expected {degree}")
        if sorted(g) != list(range(degree)):
            raise GroupError(f"{g} is not a permutation of 0..{degree - 1}")
    ident = tuple(range(degree))
    elements = [ident]
    index = {ident: 0}
    queue = deque([ident])
    while queue:
        p = queue.popleft()
        for s in gens:
            q = _compose(p, s)
            if q not in index:
                if len(elements) >= size_cap:
                    raise GroupError(f"group order exceeds size cap {size_cap}")
                index[q] = len(elements)
                elements.append(q)
                queue.append(q)
    n = len(elements)
    mul = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(elements):
        for j, q in enumerate(elements):
            mul[i, j] = index[_compose(p, q)]
    return FiniteGroup(mul, labels=elements, name=name, size_cap=size_cap)


def cyclic_group(m: int) -> FiniteGroup:
    ar = np.arange(m)
    return FiniteGroup((ar[:, None] + ar[None, :]) % m, name=f"Z{m}", size_cap=max(m, DEFAULT_SIZE_CAP))


def direct_product(A: FiniteGroup, B: FiniteGroup, name: str = "") -> FiniteGroup:
    """Element (a, b) has index ``a * |B| + b``."""
    na, nb = A.size, B.size
    mul = np.empty((na * nb, na * nb), dtype=np.int64)
    for a1 in range(na):
        for b1 in range(nb):
            for a2 in range(na):
                mul[a1 * nb + b1, a2 * nb: (a2 + 1) * nb] = A.mul[a1, a2] * nb + B.mul[b1]
    labels = [(a, b) for a in range(na) for b in range(nb)]
    return FiniteGroup(mul, labels=labels, name=name or f"{A.name}x{B.name}",
                       size_cap=max(na * nb, DEFAULT_SIZE_CAP))


def product_factors(P: FiniteGroup, A: FiniteGroup, B: FiniteGroup) -> tuple[Subgroup, Subgroup]:
    """The subgroups A x 1 and 1 x B of ``P = direct_product(A, B)``."""
    nb = B.size
    left = Subgroup(P, tuple(a * nb + B.identity for a in range(A.size)))
    right = Subgroup(P, tuple(A.identity * nb + b for b in range(nb)))
    return left, right


def subgroup_closure(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    gens = [int(g) for g in gens]
    for g in gens:
        if not 0 <= g < G.size:
            raise GroupError(f"{g} is not an element of the group")
    seen = {G.identity}
    queue = deque([G.identity])
    while queue:
        h = queue.popleft()
        for s in gens:
            k = int(G.mul[h, s])
            if k not in seen:
                seen.add(k)
                queue.append(k)
    return Subgroup(G, tuple(seen))


def f_conjugacy_classes(G: FiniteGroup, F: Subgroup) -> ConjugacyData:
    class_of = [-1] * G.size
    classes = []
    for g in G.elements:
        if class_of[g] >= 0:
            continue
        orbit = sorted({G.conjugate(f, g) for f in F.elements})
        for h in orbit:
            class_of[h] = len(classes)
        classes.append(tuple(orbit))
    return ConjugacyData(F, tuple(classes), tuple(class_of))


def centralizer(G: FiniteGroup, F: Subgroup, g: int) -> Subgroup:
    return Subgroup(G, tuple(f for f in F.elements if G.mul[f, g] == G.mul[g, f]))


def fc_data(G: FiniteGroup, F: Subgroup) -> tuple[Subgroup, dict[int, int]]:
    """FC_G(F) and the centralizer indices [F : C_F(g)].

    Every F-class of a finite group is finite, so FC_G(F) is all of G; the
    index is checked against the class size (orbit-stabilizer).
    """
    cd = f_conjugacy_classes(G, F)
    finite = [g for g in G.elements if len(cd.classes[cd.class_of[g]]) <= F.order]
    fc = Subgroup(G, tuple(finite))
    if fc.order != G.size:
        raise AssertionError("FC_G(F) differs from G for a finite group")
    indices = {}
    for g in G.elements:
        c = centralizer(G, F, g)
        idx = F.order // c.order
        if idx * c.order != F.order or idx != len(cd.classes[cd.class_of[g]]):
            raise AssertionError(f"orbit-stabilizer fails at {g}")
        indices[g] = idx
    return fc, indices


def symmetrize(G: FiniteGroup, sigma: Iterable[int]) -> list[int]:
    s = set(int(x) for x in sigma)
    s |= {int(G.inv[x]) for x in s}
    return sorted(s)


def word_lengths(G: FiniteGroup, sigma: Iterable[int]) -> dict[int, int]:
    """BFS distances from the identity in the Cayley graph of <sigma>."""
    gens = symmetrize(G, sigma)
    dist = {G.identity: 0}
    queue = deque([G.identity])
    while queue:
        h = queue.popleft()
        for s in gens:
            k = int(G.mul[h, s])
            if k not in dist:
                dist[k] = dist[h] + 1
                queue.append(k)
    return dist


def word_length(G: FiniteGroup, sigma: Iterable[int], g: int) -> int:
    dist = word_lengths(G, sigma)
    if g not in dist:
        raise GroupError(f"element {g} is not in the subgroup generated by {sorted(sigma)}")
    return dist[g]
