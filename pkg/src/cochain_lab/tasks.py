"""Task runners behind the command line.  Each returns a Report."""

from __future__ import annotations

import time

import numpy as np

from . import exact
from .affine import (AffineAction, FpAffineAction, FpGroupPresentation, FpModule, abelianization,
                     almost_fixed_point, fixed_points, fp_cocycle_space, guichardet_criterion,
                     quotient_displacement_check)
from .algebra import GroupAlgebraElement, class_average, commutant_basis, uniform_average
from .cochains import CapError, Cochain, cohomology, random_cocycle, restriction, in_coboundaries
from .config import ConfigError, TaskConfig
from .groups import (FiniteGroup, GroupError, Subgroup, build_group, f_conjugacy_classes, fc_data,
                     subgroup_closure, word_lengths)
from .homotopy import (BudgetExhausted, SplittingError, almost_coboundary_witness, contracting_homotopy,
                       find_contracting_pair, generator_average_decay, nowak_projection,
                       restriction_nullifier, shrinking_average, verify_homotopy_identity)
from .modules import ModuleError, apply_algebra, common_fixed_space, fixed_space
from .reports import Report
from .samples import GROUP_NAMES, build_named_module, sample_group


def _group(cfg: TaskConfig) -> FiniteGroup:
    spec = cfg.group
    try:
        if spec["type"] == "named":
            if spec["name"] not in GROUP_NAMES:
                raise ConfigError("E_SPEC", f"unknown named group {spec['name']!r}", known=list(GROUP_NAMES))
            return sample_group(spec["name"])
        return build_group(spec, size_cap=spec.get("size_cap", 64))
    except GroupError as e:
        code = "E_CAP" if "cap" in str(e) else "E_SPEC"
        raise ConfigError(code, str(e)) from None


def _module(cfg: TaskConfig, G: FiniteGroup):
    spec = dict(cfg.module or {"kind": "regular"})
    p = spec.pop("p", cfg.params.get("p", "2"))
    try:
        return build_named_module(G, spec, p)
    except (ModuleError, KeyError, ValueError) as e:
        raise ConfigError("E_SPEC", f"module: {e}") from None


def _subgroup(G: FiniteGroup, spec) -> Subgroup:
    if spec is None:
        return G.whole()
    try:
        if isinstance(spec, dict):
            return subgroup_closure(G, spec.get("generators", []))
        return Subgroup(G, tuple(spec))
    except GroupError as e:
        raise ConfigError("E_SPEC", f"subgroup: {e}") from None


def _xi(G, spec, default):
    if spec is None:
        return default
    try:
        return GroupAlgebraElement.from_json(G, spec)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError("E_SPEC", f"xi: {e}") from None


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


# --------------------------------------------------------------------------


def task_group_info(cfg, rng):
    G = _group(cfg)
    cd = f_conjugacy_classes(G, G.whole())
    res = {"order": G.size, "identity": G.identity, "abelian": G.is_abelian(),
           "element_orders": [G.element_order(g) for g in G.elements],
           "class_sizes": sorted(cd.sizes())}
    if "sigma" in cfg.params:
        dist = word_lengths(G, cfg.params["sigma"])
        res["word_lengths"] = {str(g): dist.get(g) for g in G.elements}
    return "pass", res, None


def task_fc_data(cfg, rng):
    G = _group(cfg)
    F = _subgroup(G, cfg.params.get("subgroup"))
    fc, idx = fc_data(G, F)
    cd = f_conjugacy_classes(G, F)
    ok = fc.order == G.size and all(idx[g] == len(cd.classes[cd.class_of[g]]) for g in G.elements)
    return _status(ok), {"fc_order": fc.order, "classes": [list(c) for c in cd.classes],
                         "centralizer_indices": {str(g): i for g, i in idx.items()}}, None


def task_commutant(cfg, rng):
    G = _group(cfg)
    F = _subgroup(G, cfg.params.get("subgroup"))
    cb = commutant_basis(G, F)
    res = {"basis_size": len(cb.basis), "kernel_dim": cb.kernel_dim,
           "class_sizes": [len(b.support) for b in cb.basis]}
    ok = len(cb.basis) == cb.kernel_dim
    if cfg.module is not None:
        M = _module(cfg, G)
        avgs = [apply_algebra(M, a) for a in cb.averages]
        fx = common_fixed_space(M.dim, avgs)
        fg = fixed_space(M, G.whole().generators())
        same = fx.shape[0] == fg.shape[0] and (fx.shape[0] == 0 or exact.same_span(fx, fg))
        res["class_average_fixed_dim"] = fx.shape[0]
        res["invariant_dim"] = fg.shape[0]
        ok = ok and same
    return _status(ok), res, None


def task_cohomology(cfg, rng):
    G = _group(cfg)
    M = _module(cfg, G)
    res = {}
    for n in cfg.params["degrees"]:
        r = cohomology(M, n, mode=cfg.mode, with_bases=False, flat_cap=cfg.params["flat_cap"])
        res[str(n)] = {"dim_C": r.dim_C, "dim_Z": r.dim_Z, "dim_B": r.dim_B, "dim_H": r.dim_H}
        if cfg.params.get("cross_check") and cfg.mode == "exact":
            f = cohomology(M, n, mode="float", with_bases=False)
            if f.dim_H != r.dim_H:
                return "fail", res, {"degree": n, "exact_dim_H": r.dim_H, "float_dim_H": f.dim_H}
    return "pass", res, None


def task_split_check(cfg, rng):
    G = _group(cfg)
    M = _module(cfg, G)
    xi = _xi(G, cfg.params.get("xi"), uniform_average(G, G.elements))
    K = contracting_homotopy(M, xi)
    degrees = cfg.params["degrees"]
    bad = {n: r for n, r in K.verify(degrees).items() if r is not None}
    dims = {str(n): cohomology(M, n, with_bases=False).dim_H for n in degrees}
    proj = nowak_projection(M, xi)
    res = {"residual": "0" if not bad else "nonzero", "dim_H": dims, "nowak_dims": proj.dims,
           "idempotency_residual": proj.idempotency_residual, "xi": xi.to_json()}
    witness = None
    if bad:
        n, row = next(iter(bad.items()))
        N = G.size
        idx = np.unravel_index(row, (N,) * n + (M.dim,))
        witness = {"degree": n, "tuple": [int(i) for i in idx[:-1]], "coordinate": int(idx[-1])}
    ok = not bad and all(v == 0 for v in dims.values())
    return _status(ok), res, witness


def _xi_for_homotopy(cfg, G, F):
    if "xi" in cfg.params:
        return _xi(G, cfg.params["xi"], None)
    cd = f_conjugacy_classes(G, F)
    cls = cfg.params.get("class")
    if cls is None:
        cls = max(range(len(cd.classes)), key=lambda i: (len(cd.classes[i]), -i))
    return class_average(cd, int(cls))


def task_homotopy_check(cfg, rng):
    G = _group(cfg)
    M = _module(cfg, G)
    F = _subgroup(G, cfg.params.get("subgroup"))
    xi = _xi_for_homotopy(cfg, G, F)
    r = verify_homotopy_identity(M, xi, F, cfg.params["degrees"], cfg.params.get("trials", 20), rng)
    res = {"test": "homotopy_identity", "group": G.name or G.size, "xi": xi.to_json(),
           "degrees": cfg.params["degrees"], "residual": r.residual, "trials": r.trials}
    return _status(r.ok), res, r.witness


def task_restriction_check(cfg, rng):
    G = _group(cfg)
    M = _module(cfg, G)
    F = _subgroup(G, cfg.params.get("subgroup"))
    if fixed_space(M, G.whole().generators()).shape[0]:
        return "fail", {"reason": "X^G is nonzero"}, None
    rep = cohomology(M, 1, with_bases=True)
    MF = M.restrict(F)
    failures = []
    for i, z in enumerate(rep.basis_Z):
        phi = Cochain.from_flat(M, 1, z)
        if in_coboundaries(MF, restriction(phi, F)) is None:
            failures.append({"basis_index": i})
            break
    pair = find_contracting_pair(M, F)
    xi = pair.product
    checked = {}
    for n in [m for m in cfg.params["degrees"] if m >= 1]:
        for _ in range(cfg.params.get("trials", 5)):
            phi = random_cocycle(M, n, rng)
            restriction_nullifier(phi, F, xi)
        checked[str(n)] = cfg.params.get("trials", 5)
    res = {"cocycle_basis_size": rep.basis_Z.shape[0], "restricts_to_coboundaries": not failures,
           "nullifier_checked": checked, "pair_norm_bound": pair.norm_bound, "xi": xi.to_json()}
    return _status(not failures), res, (failures[0] if failures else None)


def _parse_vectors(vs):
    return [exact.frac_array(v) for v in vs]


def task_affine_fixed(cfg, rng):
    params = cfg.params
    eps = params["epsilon"]
    if cfg.group["type"] == "fp":
        P = FpGroupPresentation.from_spec(cfg.group)
        spec = cfg.module or {}
        try:
            M = FpModule(P, spec["matrices"], spec.get("p", "2"))
            alpha = FpAffineAction(M, params["cocycle"])
        except (KeyError, ValueError) as e:
            raise ConfigError("E_SPEC", f"fp action: {e}") from None
        E = params.get("elements", P.generators)
    else:
        G = _group(cfg)
        M = _module(cfg, G)
        if "cocycle" in params:
            phi = Cochain.from_json(M, params["cocycle"])
        else:
            phi = random_cocycle(M, 1, rng)
        alpha = AffineAction(M, phi)
        E = params.get("elements", list(G.elements))
    fp = fixed_points(alpha)
    af = almost_fixed_point(alpha, E, eps, restarts=params.get("restarts", 16),
                            iters=params.get("iterations", 10_000), seed=cfg.seed)
    res = {"fixed_set_empty": fp.empty, "fixed_point": None if fp.empty else fp.point,
           "fixed_set_dim": None if fp.empty else fp.directions.shape[0],
           "displacement": {"value": af.value, "below_eps": af.below_eps, "exact": af.exact_fixed,
                            "restarts": af.restarts, "seed": af.seed}}
    return "pass", res, None


def task_fp_h1(cfg, rng):
    P = FpGroupPresentation.from_spec(cfg.group)
    spec = cfg.module or {"kind": "trivial"}
    try:
        if spec.get("kind") == "trivial":
            d = int(spec.get("dim", 1))
            M = FpModule(P, [exact.identity(d)] * P.rank, spec.get("p", "2"))
        else:
            M = FpModule(P, spec["matrices"], spec.get("p", "2"))
    except (KeyError, ValueError) as e:
        raise ConfigError("E_SPEC", f"fp module: {e}") from None
    h = fp_cocycle_space(P, M)
    ab = abelianization(P)
    res = {"dim_Z1": h.dim_Z, "dim_B1": h.dim_B, "dim_H1": h.dim_H,
           "abelianization": {"free_rank": ab.free_rank, "torsion": list(ab.torsion)}}
    expected = cfg.params.get("expected_dim_H1")
    ok = expected is None or expected == h.dim_H
    return _status(ok), res, None if ok else {"expected": expected, "got": h.dim_H}


def task_approximation_suite(cfg, rng):
    G = _group(cfg)
    M = _module(cfg, G)
    eps = cfg.params["epsilon"]
    steps = cfg.params.get("max_steps", 200)
    F = _subgroup(G, cfg.params.get("subgroup"))
    res = {}
    cd = f_conjugacy_classes(G, F)
    gens = [class_average(cd, i) for i in range(len(cd.classes))]
    E = [exact.frac_array(rng.integers(-5, 6, size=M.dim)) for _ in range(3)]
    try:
        sh = shrinking_average(M, gens, E, eps, max_steps=steps)
        res["shrinking_average"] = {"bound": sh.best_bound, "certified": sh.certified, "steps": sh.steps}
        phi = random_cocycle(M, 1, rng)
        tuples = [(f,) for f in F.elements]
        w = almost_coboundary_witness(phi, F, tuples, eps, max_steps=steps)
        res["almost_coboundary"] = {"bound": w.sup_bound, "certified": w.certified}
        sigma = cfg.params.get("sigma", G.whole().generators())
        dec = generator_average_decay(phi, sigma, eps, max_power=cfg.params.get("max_power", 400))
        res["generator_average"] = {"bound": dec.bound, "certified": dec.certified, "power": dec.power}
    except BudgetExhausted as e:
        res["budget"] = str(e)
        return "budget-exhausted", res, {"best_bound": e.best_bound}
    ok = all(v["bound"] < eps for v in res.values())
    return _status(ok), res, None


def task_appendix_suite(cfg, rng):
    G = _group(cfg)
    M = _module(cfg, G)
    samples = cfg.params.get("samples", 1000)
    cocycles = [random_cocycle(M, 1, rng) for _ in range(cfg.params.get("cocycles", 3))]
    qd = quotient_displacement_check(M, samples, rng, cocycles=cocycles)
    gu = guichardet_criterion(M)
    res = {"quotient_displacement": {"ok": qd.ok, "samples": qd.samples, "exact": qd.exact,
                                     "min_ratio": qd.worst_ratio_low, "max_ratio": qd.worst_ratio_high},
           "guichardet": {"ok": gu.ok, "quotient_dim": gu.quotient_dim, "norm_bound": gu.norm_bound,
                          "dim_B1": gu.dim_B1, "dim_closure_B1": gu.dim_closure_B1}}
    witness = qd.failures[0] if qd.failures else None
    return _status(qd.ok and gu.ok), res, witness


RUNNERS = {
    "group-info": task_group_info,
    "fc-data": task_fc_data,
    "commutant": task_commutant,
    "cohomology": task_cohomology,
    "split-check": task_split_check,
    "homotopy-check": task_homotopy_check,
    "restriction-check": task_restriction_check,
    "affine-fixed": task_affine_fixed,
    "fp-h1": task_fp_h1,
    "approximation-suite": task_approximation_suite,
    "appendix-suite": task_appendix_suite,
}


def run_task(cfg: TaskConfig) -> Report:
    """Dispatch; configuration problems raise ConfigError, module errors become status fail."""
    rng = np.random.default_rng(cfg.seed if cfg.seed is not None else 0)
    t0 = time.perf_counter()
    report = Report(cfg.task, cfg.content_hash(), "fail", seed=cfg.seed, mode=cfg.mode)
    try:
        status, results, witness = RUNNERS[cfg.task](cfg, rng)
        report.status, report.results, report.witness = status, results, witness
        if status == "budget-exhausted" and witness and "best_bound" in witness:
            report.best_bound = witness["best_bound"]
    except ConfigError:
        raise
    except CapError as e:
        raise ConfigError("E_CAP", str(e), cap=e.cap) from None
    except (SplittingError, ModuleError, ValueError, ArithmeticError, AssertionError) as e:
        report.status = "fail"
        report.error = {"type": type(e).__name__, "message": str(e)}
    report.timing = time.perf_counter() - t0
    return report
