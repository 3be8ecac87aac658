"""The real group algebra RG with exact rational coefficients.

An element is a finitely supported map ``group index -> scalar``; zero
coefficients are dropped so equality is structural.  ``*`` is convolution
when both sides are algebra elements and scalar multiplication otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import exact
from .groups import ConjugacyData, FiniteGroup, Subgroup, f_conjugacy_classes


class AlgebraError(ValueError):
    pass


def _scalar(v, exact_mode: bool):
    if exact_mode:
        return exact.to_fraction(v)
    return float(v)


class GroupAlgebraElement:
    __slots__ = ("group", "coeffs", "exact")

    def __init__(self, group: FiniteGroup, coeffs=None, exact_mode: bool = True):
        self.group = group
        self.exact = exact_mode
        clean = {}
        for g, v in (coeffs or {}).items():
            g = int(g)
            if not 0 <= g < group.size:
                raise AlgebraError(f"{g} is not an element of {group}")
            v = _scalar(v, exact_mode)
            if v != 0:
                clean[g] = clean.get(g, 0) + v
        self.coeffs = {g: v for g, v in sorted(clean.items()) if v != 0}

    # -- constructors ------------------------------------------------------

    @classmethod
    def delta(cls, group: FiniteGroup, g: int) -> "GroupAlgebraElement":
        return cls(group, {g: 1})

    @classmethod
    def zero(cls, group: FiniteGroup) -> "GroupAlgebraElement":
        return cls(group, {})

    @classmethod
    def from_vector(cls, group: FiniteGroup, vec) -> "GroupAlgebraElement":
        return cls(group, {g: v for g, v in enumerate(vec) if v != 0})

    # -- basic protocol ----------------------------------------------------

    def __getitem__(self, g: int):
        return self.coeffs.get(g, Fraction(0) if self.exact else 0.0)

    def __eq__(self, other):
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        return self.group is other.group and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.group), tuple(self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        terms = [f"{exact.fraction_str(v) if self.exact else v}*g{g}" for g, v in self.coeffs.items()]
        return " + ".join(terms)

    def _check(self, other: "GroupAlgebraElement"):
        if other.group is not self.group:
            raise AlgebraError("group algebra elements over different groups")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for g, v in other.coeffs.items():
            out[g] = out.get(g, 0) + v
        return GroupAlgebraElement(self.group, out, self.exact and other.exact)

    def __neg__(self):
        return GroupAlgebraElement(self.group, {g: -v for g, v in self.coeffs.items()}, self.exact)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, GroupAlgebraElement):
            return convolve(self, other)
        t = _scalar(other, self.exact)
        return GroupAlgebraElement(self.group, {g: t * v for g, v in self.coeffs.items()}, self.exact)

    def __rmul__(self, other):
        return self * other

    def __pow__(self, k: int):
        if k < 0:
            raise AlgebraError("negative powers are not defined")
        out = GroupAlgebraElement.delta(self.group, self.group.identity)
        for _ in range(k):
            out = convolve(out, self)
        return out

    @property
    def support(self) -> tuple:
        return tuple(self.coeffs)

    def augmentation(self):
        return sum(self.coeffs.values(), Fraction(0) if self.exact else 0.0)

    def vector(self) -> np.ndarray:
        """Dense coefficient vector of length |G|."""
        out = exact.zeros(self.group.size) if self.exact else np.zeros(self.group.size)
        for g, v in self.coeffs.items():
            out[g] = v
        return out

    def commutes_with(self, other: "GroupAlgebraElement") -> bool:
        return convolve(self, other) == convolve(other, self)

    def to_json(self) -> dict:
        return {str(g): exact.fraction_str(v) for g, v in self.coeffs.items()}

    @classmethod
    def from_json(cls, group: FiniteGroup, data) -> "GroupAlgebraElement":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(group, {int(k): exact.to_fraction(v) for k, v in data.items()})


def convolve(xi: GroupAlgebraElement, zeta: GroupAlgebraElement) -> GroupAlgebraElement:
    """(xi * zeta)(h) = sum_g xi(g) zeta(g^-1 h), computed as sum over products g f."""
    xi._check(zeta)
    mul = xi.group.mul
    out: dict[int, object] = {}
    for g, s in xi.coeffs.items():
        row = mul[g]
        for f, t in zeta.coeffs.items():
            h = int(row[f])
            out[h] = out.get(h, 0) + s * t
    return GroupAlgebraElement(xi.group, out, xi.exact and zeta.exact)


@dataclass(frozen=True)
class AlgebraClassification:
    in_augmentation_ideal: bool
    in_affine_space: bool
    in_simplex: bool
    augmentation_value: Fraction


def classify(xi: GroupAlgebraElement) -> AlgebraClassification:
    a = xi.augmentation()
    affine = a == 1
    simplex = affine and all(v >= 0 for v in xi.coeffs.values())
    return AlgebraClassification(a == 0, affine, simplex, a)


def in_simplex(xi: GroupAlgebraElement) -> bool:
    return classify(xi).in_simplex


def uniform_average(group: FiniteGroup, S: Iterable[int]) -> GroupAlgebraElement:
    S = sorted(set(int(s) for s in S))
    if not S:
        raise AlgebraError("uniform average over an empty set")
    w = Fraction(1, len(S))
    return GroupAlgebraElement(group, {s: w for s in S})


def class_sum(cd: ConjugacyData, class_id: int) -> GroupAlgebraElement:
    if not 0 <= class_id < len(cd.classes):
        raise AlgebraError(f"invalid class id {class_id}")
    return GroupAlgebraElement(cd.group, {h: 1 for h in cd.classes[class_id]})


def class_average(cd: ConjugacyData, class_id: int) -> GroupAlgebraElement:
    if not 0 <= class_id < len(cd.classes):
        raise AlgebraError(f"invalid class id {class_id}")
    return uniform_average(cd.group, cd.classes[class_id])


@dataclass(frozen=True)
class CommutantBasis:
    acting: Subgroup
    basis: tuple
    averages: tuple
    kernel_dim: int


def commutation_system(G: FiniteGroup, F: Subgroup) -> np.ndarray:
    """Rows encode (f xi - xi f)(h) = xi(f^-1 h) - xi(h f^-1) for generators f of F."""
    rows = []
    for f in F.generators():
        finv = int(G.inv[f])
        for h in G.elements:
            row = [0] * G.size
            row[int(G.mul[finv, h])] += 1
            row[int(G.mul[h, finv])] -= 1
            if any(row):
                rows.append(row)
    if not rows:
        return exact.zeros((0, G.size))
    return exact.frac_array(rows)


def commutant_basis(G: FiniteGroup, F: Subgroup) -> CommutantBasis:
    """Class sums of the F-conjugacy classes, checked against the exact kernel
    of the commutation system (equal dimension, containment both ways)."""
    cd = f_conjugacy_classes(G, F)
    sums = tuple(class_sum(cd, i) for i in range(len(cd.classes)))
    avgs = tuple(class_average(cd, i) for i in range(len(cd.classes)))
    system = commutation_system(G, F)
    kernel = exact.nullspace(system) if system.shape[0] else exact.identity(G.size)
    span = np.array([s.vector() for s in sums], dtype=object)
    if kernel.shape[0] != len(sums):
        raise AssertionError(f"commutant dimension {kernel.shape[0]} != number of classes {len(sums)}")
    if not exact.same_span(span, kernel):
        raise AssertionError("class sums do not span the commutant")
    for b in sums:
        for f in F.generators():
            if not b.commutes_with(GroupAlgebraElement.delta(G, f)):
                raise AssertionError("class sum fails to commute")
    return CommutantBasis(F, sums, avgs, kernel.shape[0])
