"""Small groups and modules used throughout the tests and the CLI.

Every group comes with a rotation-type module (no nonzero invariant
vectors) realised by signed permutations, so it is isometric for every p,
except Z3 whose rotation piece is the augmentation part of the regular
representation with the restricted norm.
"""

from __future__ import annotations

from functools import lru_cache

from .groups import (FiniteGroup, Subgroup, build_group, cyclic_group, direct_product, product_factors,
                     subgroup_closure)
from .modules import BanachModule, build_module

GROUP_NAMES = ("Z2", "Z3", "Z4", "Z2xZ2", "S3", "Z6", "D8", "A4")


@lru_cache(maxsize=None)
def sample_group(name: str) -> FiniteGroup:
    if name in ("Z2", "Z3", "Z4", "Z6"):
        G = cyclic_group(int(name[1:]))
    elif name == "Z2xZ2":
        G = direct_product(cyclic_group(2), cyclic_group(2), name="Z2xZ2")
    elif name == "S3":
        G = build_group(generators=[(1, 0, 2), (1, 2, 0)], name="S3")
    elif name == "D8":
        G = build_group(generators=[(1, 2, 3, 0), (0, 3, 2, 1)], name="D8")
    elif name == "A4":
        G = build_group(generators=[(1, 2, 0, 3), (1, 0, 3, 2)], name="A4")
    else:
        raise KeyError(f"unknown sample group {name!r}")
    G.name = name
    return G


def _rotation_spec(name: str, G: FiniteGroup) -> dict:
    if name == "Z2":
        return {"kind": "matrices", "entries": {"1": [[-1]]}}
    if name == "Z3":
        return {"kind": "regular", "part": "complement"}
    if name == "Z4":
        return {"kind": "matrices", "entries": {"1": [[0, -1], [1, 0]]}}
    if name == "Z6":
        return {"kind": "matrices", "entries": {"1": [[0, 0, -1], [-1, 0, 0], [0, -1, 0]]}}
    if name == "Z2xZ2":
        return {"kind": "matrices", "entries": {"2": [[-1, 0], [0, 1]], "1": [[1, 0], [0, -1]]}}
    if name == "S3":
        return {"kind": "natural", "twist": "sign"}
    if name == "D8":
        r, s = G.index_of((1, 2, 3, 0)), G.index_of((0, 3, 2, 1))
        return {"kind": "matrices", "entries": {str(r): [[0, -1], [1, 0]], str(s): [[1, 0], [0, -1]]}}
    if name == "A4":
        a, b = G.index_of((1, 2, 0, 3)), G.index_of((1, 0, 3, 2))
        return {"kind": "matrices", "entries": {str(a): [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
                                                str(b): [[1, 0, 0], [0, -1, 0], [0, 0, -1]]}}
    raise KeyError(name)


@lru_cache(maxsize=None)
def rotation_module(name: str, p="2") -> BanachModule:
    G = sample_group(name)
    return build_module(G, _rotation_spec(name, G), p=p, name=f"{name}-rotation")


@lru_cache(maxsize=None)
def regular_module(name: str, p="2") -> BanachModule:
    return build_module(sample_group(name), {"kind": "regular"}, p=p, name=f"{name}-regular")


@lru_cache(maxsize=None)
def trivial_module(name: str, dim: int = 1, p="2") -> BanachModule:
    return build_module(sample_group(name), {"kind": "trivial", "dim": dim}, p=p, name=f"{name}-trivial")


def build_named_module(G: FiniteGroup, repspec: dict, p) -> BanachModule:
    """``{"kind": "rotation"}`` on a named sample group, else the generic builder."""
    if repspec.get("kind") == "rotation":
        if G.name not in GROUP_NAMES or sample_group(G.name) is not G:
            raise KeyError("rotation modules exist only for named sample groups")
        return rotation_module(G.name, str(p))
    return build_module(G, repspec, p=p)


def proper_subgroups(name: str) -> list[Subgroup]:
    """A few nontrivial proper subgroups per sample group (cyclic ones from each element)."""
    G = sample_group(name)
    seen, out = set(), []
    for g in G.elements:
        H = subgroup_closure(G, [g])
        if 1 < H.order < G.size and H.elements not in seen:
            seen.add(H.elements)
            out.append(H)
    return out


def order3_subgroup_of_S3() -> Subgroup:
    G = sample_group("S3")
    return subgroup_closure(G, [G.index_of((1, 2, 0))])


def product_with_factors(a: str, b: str):
    """(A x B, A x 1, 1 x B) for two sample groups."""
    A, B = sample_group(a), sample_group(b)
    P = direct_product(A, B, name=f"{a}x{b}")
    return P, *product_factors(P, A, B)


# finitely presented forms of the finite cyclic groups and the Klein group;
# generator images are element indices in the sample groups above
FP_FORMS = {
    "Z2": ({"type": "fp", "generators": ["a"], "relators": ["aa"]}, [1]),
    "Z3": ({"type": "fp", "generators": ["a"], "relators": ["aaa"]}, [1]),
    "Z4": ({"type": "fp", "generators": ["a"], "relators": ["aaaa"]}, [1]),
    "Z6": ({"type": "fp", "generators": ["a"], "relators": ["aaaaaa"]}, [1]),
    "Z2xZ2": ({"type": "fp", "generators": ["a", "b"], "relators": ["aa", "bb", "abAB"]}, [2, 1]),
}
