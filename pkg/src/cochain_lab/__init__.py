"""Exact cohomology of finite groups acting isometrically on l^p spaces."""

from .algebra import GroupAlgebraElement, classify, convolve, uniform_average
from .cochains import Cochain, apply_coboundary, coboundary_matrix, cohomology, multiaffine_eval, restriction
from .groups import FiniteGroup, Subgroup, build_group, f_conjugacy_classes, subgroup_closure
from .modules import BanachModule, apply_algebra, build_module

__version__ = "0.1.0"

__all__ = ["BanachModule", "Cochain", "FiniteGroup", "GroupAlgebraElement", "Subgroup", "apply_algebra",
           "apply_coboundary", "build_group", "build_module", "classify", "coboundary_matrix", "cohomology",
           "convolve", "f_conjugacy_classes", "multiaffine_eval", "restriction", "subgroup_closure",
           "uniform_average"]
