"""Every check run by ``verify-example``, as a list of pass/fail records.

Each record names the result it checks (``anchor``) or the literal
``"plumbing"`` for artifact-internal consistency checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import RunConfig
from .core import PLUS_INF, ExtFunction, Grid1D, Grids, sum_functions
from .duality import (
    GapReport,
    certificate_margin,
    certify_gap_ladder,
    certify_gap_at_point,
    dual_value,
    primal_value,
    primal_via_conjugate,
    scaled_tol,
)
from .example import (
    ABS,
    COS,
    EXAMPLE,
    F1,
    F2,
    F3,
    INDICATOR_ZERO,
    ZERO_FN,
    FiniteRegion,
    HRegionVerdict,
    LClass,
    check_H_convex_region,
    chi,
    classify_L_convex,
    closed_conjugate,
    closed_conjugate_fn,
    closed_subdiff,
    closed_support_contains,
    phi_function,
)
from .quadspace import QuadAffine, QuadLinear
from .subdiff import (
    check_inclusion_with_factor,
    check_sum_rule,
    domain_map,
    subdiff_contains,
    subdiff_enumerate,
    sum_rule_rhs,
    within_dilation,
)
from .transforms import (
    biconjugate_values,
    conjugate,
    conjugate_values,
    inf_convolution,
    support_contains,
    support_sum_closure_check,
    tabulate_conjugate,
)

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"
PLUMBING = "plumbing"

SEED = 20240601
N_SUBDIFF_SAMPLES = 50
N_WEAK_DUALITY = 20
INF_COLLAR = 0.02
# a-spots for the "dom f* is covered by eps-subdifferentials" check; the maximisers lie in [-3, 3]
DOM_SPOTS = {"f1": (-5.0, -1.0, 0.0, 1.0, 3.0, 10.0), "f2": (-10.0, -2.0, -1.0, -0.5), "f3": (-10.0, -3.0, -2.0, -1.0, -0.5, 0.0)}
NEGCOS = ExtFunction("negcos", lambda x: -np.cos(x))


@dataclass
class Record:
    check_id: str
    anchor: str
    status: str
    max_error: float = 0.0
    witnesses: dict = field(default_factory=dict)


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


@dataclass
class VerificationReport:
    config: dict
    records: list[Record]
    gap_report: Optional[GapReport]

    @property
    def passed(self) -> bool:
        return all(r.status == PASS for r in self.records)

    def summary(self) -> dict:
        out = {PASS: 0, FAIL: 0, INDETERMINATE: 0}
        for r in self.records:
            out[r.status] += 1
        return out


def biconj_grids(grids: Grids) -> tuple[Grid1D, ...]:
    """a-grids for biconjugates: a coarse tail towards -1000 plus the fine grid
    extended upwards far enough to reach the maximiser of every x in the window."""
    a = grids.a
    xmax = max(abs(grids.x.lo), abs(grids.x.hi))
    hi = max(a.hi, 2 * xmax**2 + 2)
    out = []
    if a.lo > -1000.0:
        out.append(Grid1D(-1000.0, a.lo, 0.5))
    out.append(Grid1D(a.lo, hi, a.step))
    return tuple(out)


def hausdorff_to_descriptor(members: np.ndarray, desc, step: float) -> float:
    """Two-sided distance between grid members and a closed-form set (inf on a mismatch in emptiness)."""
    if desc.kind == "empty" or len(members) == 0:
        return 0.0 if (desc.kind == "empty") == (len(members) == 0) else PLUS_INF
    d_out = float(np.max(desc.distance(members)))
    d_in = max(0.0, float(np.min(members)) - desc.lo, desc.hi - float(np.max(members)))
    return max(d_out, d_in)


# ---------------------------------------------------------------- conjugates


def check_conjugates(cfg: RunConfig, tol: float) -> list[Record]:
    recs = []
    a = cfg.a_grid.points
    for f in EXAMPLE:
        table = tabulate_conjugate(f, cfg.a_grid, cfg.x_grid)
        closed = np.array([closed_conjugate(f.name, v) for v in a])
        fin = np.isfinite(closed) & np.isfinite(table.values)
        err = float(np.max(np.abs(closed[fin] - table.values[fin]))) if fin.any() else 0.0
        worst = float(a[fin][np.argmax(np.abs(closed[fin] - table.values[fin]))]) if fin.any() else None
        both_fin = np.isfinite(closed) == np.isfinite(table.values)
        recs.append(
            Record(f"conjugate_closed_form_{f.name}", f"closed-form conjugate of {f.name}", _status(err <= tol), err, {"worst_a": worst})
        )
        collar = np.abs(a) <= INF_COLLAR if f.name != "f1" else np.zeros(len(a), dtype=bool)
        bad = ~both_fin & ~collar
        recs.append(
            Record(
                f"conjugate_inf_flags_{f.name}",
                f"infinite branch of the conjugate of {f.name}",
                _status(not bad.any()),
                float(bad.sum()),
                {"mismatched_a": a[bad][:5].tolist()},
            )
        )
    left = -1.0 - 1.0 / (-2.0 - 1e-12)
    recs.append(Record("chi_continuity", "helper chi continuous at a = -2", _status(abs(left - chi(-2.0)) <= 1e-9), abs(left - chi(-2.0))))
    xs = cfg.x_grid.points
    viol = float(np.max(F2.sample(xs) - F3.sample(xs)))
    recs.append(Record("f3_above_f2", "f3 >= f2 pointwise", _status(viol <= 0.0), max(viol, 0.0)))
    return recs


# ------------------------------------------------------------------ supports


def support_lattice() -> tuple[np.ndarray, np.ndarray]:
    return np.linspace(-5.0, 2.0, 101), np.linspace(-3.0, 1.5, 101)


def check_supports(cfg: RunConfig, tol: float) -> list[Record]:
    recs = []
    A, B = support_lattice()
    for f in EXAMPLE:
        bmax = -conjugate_values(f, A, cfg.x_grid)
        closed_b = np.array([-closed_conjugate(f.name, v) for v in A])
        oracle = B[None, :] <= bmax[:, None]
        closed = np.array([[closed_support_contains(f.name, av, bv) for bv in B] for av in A])
        collar = np.abs(B[None, :] - closed_b[:, None]) <= tol
        if f.name != "f1":
            collar |= (np.abs(A) <= INF_COLLAR)[:, None]
        bad = (oracle != closed) & ~collar
        # spot check through the escape-tested support membership route
        spot_bad = 0
        flat = [(i, j) for i in range(len(A)) for j in range(len(B))][::97]
        for i, j in flat:
            if collar[i, j]:
                continue
            if support_contains(f, QuadAffine(float(A[i]), float(B[j])), cfg.x_grid) != closed[i, j]:
                spot_bad += 1
        recs.append(
            Record(
                f"support_lattice_{f.name}",
                f"support set representation of {f.name}",
                _status(not bad.any() and spot_bad == 0),
                float(bad.sum() + spot_bad),
                {"lattice": [len(A), len(B)], "skipped_in_collar": int(collar.sum()), "spot_checked": len(flat)},
            )
        )
    p_quad, p_ray = (0.0, -0.25), (-3.0, 0.0)
    in_quad = lambda a, b: (a + 1) ** 2 / 4 + b <= 0
    in_ray = lambda a, b: a <= -1 and b <= 0
    ok = (
        in_quad(*p_quad)
        and not in_ray(*p_quad)
        and in_ray(*p_ray)
        and not in_quad(*p_ray)
        and support_contains(F1, QuadAffine(*p_quad), cfg.x_grid)
        and support_contains(F1, QuadAffine(*p_ray), cfg.x_grid)
    )
    recs.append(
        Record("support_f1_union", "supp f1 needs both branches", _status(ok), 0.0, {"quadratic_branch": p_quad, "ray_branch": p_ray})
    )
    probes = [(a, b) for a in (-3.0, -1.5, -0.5, 0.5, 2.0) for b in (-3.0, -1.0, 0.0, 0.5, 1.0)]
    for f, g in ((F1, F2), (F2, F3), (F1, F3)):
        tot = sum_functions([f, g])
        bad, skipped = [], 0
        for a, b in probes:
            edge = -conjugate(tot, a, cfg.x_grid)
            if a == 0.0 or (math.isfinite(edge) and abs(b - edge) <= tol):
                skipped += 1
                continue
            r = support_sum_closure_check(f, g, QuadAffine(a, b), cfg.a_grid, cfg.x_grid, tol)
            if r.in_supp_sum != r.in_closure_of_minkowski:
                bad.append((a, b))
        recs.append(
            Record(
                f"support_sum_closure_{f.name}_{g.name}",
                "supp(f+g) is the closure of supp f + supp g",
                _status(not bad),
                float(len(bad)),
                {"mismatches": bad[:5], "skipped_near_boundary": skipped},
            )
        )
    return recs


# ---------------------------------------------------------- Fenchel-Moreau


def check_fenchel_moreau(cfg: RunConfig, tol: float) -> list[Record]:
    recs = []
    grids = cfg.grids
    a_grids = biconj_grids(grids)
    wide = Grid1D(-8.0, 8.0, max(cfg.x_grid.step, 1e-2))
    wide_a = biconj_grids(Grids(wide, cfg.a_grid))
    for f in (F1, F2, F3, ABS, ZERO_FN, INDICATOR_ZERO, COS):
        xg, ag = (wide, wide_a) if f is COS else (cfg.x_grid, a_grids)
        xs = xg.points
        fx = f.sample(xs)
        fin = np.isfinite(fx)
        fss = biconjugate_values(f, xs[fin], ag, xg)
        excess = float(np.max(fss - fx[fin]))
        recs.append(
            Record(f"biconjugate_below_{f.name}", "f** <= f", _status(excess <= 1e-9), max(excess, 0.0), {"x_grid": xg.spec()})
        )
        if f in EXAMPLE:
            err = float(np.max(np.abs(fss - fx[fin])))
            recs.append(
                Record(f"biconjugate_equal_{f.name}", f"{f.name} is H-convex (f** = f)", _status(err <= tol), err)
            )
        if f is COS:
            gap = fx[fin] - fss
            k = int(np.argmax(gap))
            recs.append(
                Record(
                    "biconjugate_gap_cos",
                    "cos is not H-convex (f** < f somewhere)",
                    _status(gap[k] > 0.1),
                    float(gap[k]),
                    {"x": float(xs[fin][k])},
                )
            )
    return recs


def check_fenchel_young(cfg: RunConfig) -> list[Record]:
    recs = []
    xs = cfg.x_grid.points[:: max(1, len(cfg.x_grid.points) // 200)]
    a = cfg.a_grid.points
    for f in EXAMPLE:
        c = tabulate_conjugate(f, cfg.a_grid, cfg.x_grid).values
        fx = f.sample(xs)
        with np.errstate(invalid="ignore"):
            lhs = c[None, :] + fx[:, None] - np.square(xs)[:, None] * a[None, :]
        worst = float(np.min(np.where(np.isfinite(lhs), lhs, PLUS_INF)))
        recs.append(
            Record(f"fenchel_young_{f.name}", "f*(a) + f(x) >= a x^2", _status(worst >= -1e-9), max(0.0, -worst))
        )
    return recs


# ---------------------------------------------------------- subdifferentials


def check_subdifferentials(cfg: RunConfig, tol: float) -> list[Record]:
    recs = []
    step = cfg.a_grid.step
    rng = np.random.default_rng(SEED)
    conjs = {f.name: tabulate_conjugate(f, cfg.a_grid, cfg.x_grid) for f in EXAMPLE}
    for f in EXAMPLE:
        xs = rng.uniform(cfg.x_grid.lo, cfg.x_grid.hi, N_SUBDIFF_SAMPLES)
        errs = []
        for x in xs:
            members = subdiff_enumerate(f, float(x), 0.0, conjs[f.name]).members
            desc = closed_subdiff(f.name, float(x)).clip(cfg.a_grid.lo, cfg.a_grid.hi)
            errs.append(hausdorff_to_descriptor(members, desc, step))
        worst = float(np.max(errs))
        recs.append(
            Record(
                f"subdiff_closed_form_{f.name}",
                f"closed-form subdifferential of {f.name}",
                _status(worst <= step + 1e-9),
                worst,
                {"n_samples": N_SUBDIFF_SAMPLES, "worst_x": float(xs[int(np.argmax(errs))])},
            )
        )
    for name, x in (("f2", 0.0), ("f3", 0.0)):
        s = subdiff_enumerate({"f2": F2, "f3": F3}[name], x, 0.0, conjs[name])
        recs.append(
            Record(f"subdiff_empty_{name}_at_0", f"subdifferential of {name} at 0 is empty", _status(s.emptiness_certified), 0.0)
        )
    for x in (0.5, -0.5):
        m = subdiff_enumerate(F3, x, 0.0, conjs["f3"]).members
        err = hausdorff_to_descriptor(m, closed_subdiff("f3", x), step)
        recs.append(
            Record(f"subdiff_f3_kink_{x:+g}", "subdifferential of f3 at the kinks is [-2, 0]", _status(err <= step + 1e-9), err)
        )
    m = subdiff_enumerate(F1, 0.0, 0.0, conjs["f1"]).members
    err = hausdorff_to_descriptor(m, closed_subdiff("f1", 0.0).clip(cfg.a_grid.lo, cfg.a_grid.hi), step)
    recs.append(Record("subdiff_f1_ray", "subdifferential of f1 at 0 is a <= -1", _status(err <= step + 1e-9), err))
    ok = subdiff_contains(F2, 0.0, 0.1, QuadLinear(-20.0), closed_conjugate_fn("f2"))
    recs.append(Record("subdiff_f2_eps_nonempty", "eps-subdifferentials of H-convex f are nonempty on dom f", _status(ok), 0.0, {"a": -20.0}))
    xs = cfg.x_grid.points
    dm0 = domain_map(F2, 0.0, cfg.x_grid, conjs["f2"])
    reach = xs[(np.abs(xs) >= 1.0 / abs(cfg.a_grid.lo) + step) & (xs != 0.0)]
    dm1 = domain_map(F2, 0.1, cfg.x_grid, conjs["f2"])
    ok = 0.0 not in dm0 and np.isin(reach, dm0).all() and len(dm1) == len(xs)
    recs.append(
        Record(
            "domain_map_f2",
            "Dom of the subdifferential of f2 is x != 0; eps > 0 covers dom f2",
            _status(bool(ok)),
            0.0,
            {"eps0_points": len(dm0), "eps01_points": len(dm1), "grid_points": len(xs)},
        )
    )
    return recs


def check_subdiff_properties(cfg: RunConfig) -> list[Record]:
    recs = []
    step = cfg.a_grid.step
    conjs = {f.name: tabulate_conjugate(f, cfg.a_grid, cfg.x_grid) for f in EXAMPLE}
    xs_probe = (-2.3, -1.0, -0.5, 0.3, 0.5, 1.0, 1.7)
    ladder = sorted(cfg.eps_ladder)
    for f in EXAMPLE:
        bad = []
        for x in xs_probe:
            prev = None
            for e in [0.0] + ladder:
                cur = set(subdiff_enumerate(f, x, e, conjs[f.name]).strict.tolist())
                if prev is not None and not prev <= cur:
                    bad.append((x, e))
                prev = cur
        recs.append(
            Record(f"eps_monotone_{f.name}", "eps-subdifferentials grow with eps", _status(not bad), float(len(bad)), {"violations": bad[:5]})
        )
    xs = cfg.x_grid.points
    for f in EXAMPLE:
        c = conjs[f.name]
        missing, off_grid = [], 0
        for a in DOM_SPOTS[f.name]:
            ca = c(a)
            if not math.isfinite(ca):
                continue
            # candidates: the x-grid plus the maximiser the conjugate sweep found
            x_star = float(c.argmax[c.a_grid.lookup([a])[0]])
            cand = np.append(xs, x_star)
            slack = ca + f.sample(cand) - a * np.square(cand)
            for e in cfg.eps_ladder:
                hit = slack <= e + 1e-9
                if not np.any(hit):
                    missing.append((a, e))
                elif not np.any(hit[:-1]):
                    off_grid += 1
        recs.append(
            Record(
                f"dom_conjugate_covered_{f.name}",
                "dom f* is the intersection over eps of the ranges of the eps-subdifferential",
                _status(not missing),
                float(len(missing)),
                {"spots": list(DOM_SPOTS[f.name]), "missing": missing[:5], "witnessed_off_grid": off_grid},
            )
        )
    for f in EXAMPLE:
        depth_needed = 0
        ok = True
        for x in xs_probe:
            base = subdiff_enumerate(f, x, 0.0, conjs[f.name]).members
            for k in range(1, 11):
                up = subdiff_enumerate(f, x, 10.0**-k, conjs[f.name]).members
                if (len(up) > 0) == (len(base) > 0) and within_dilation(up, base, step).all() and within_dilation(base, up, step).all():
                    depth_needed = max(depth_needed, k)
                    break
            else:
                ok = False
        recs.append(
            Record(
                f"eps_intersection_{f.name}",
                "intersection over eta of the (eps + eta)-subdifferentials is the eps-subdifferential",
                _status(ok),
                0.0,
                {"ladder_depth_needed": depth_needed, "ladder": "10^-k, k = 1..10"},
            )
        )
    total = sum_functions(list(EXAMPLE))
    worst = -PLUS_INF
    tab = [conjs[f.name] for f in EXAMPLE]
    for a in np.arange(-3.0, 3.01, 0.5):
        a = float(np.round(a, 12))
        lhs = conjugate(total, a, cfg.x_grid)
        rhs = inf_convolution(tab, QuadLinear(a), cfg.a_grid).value
        if math.isfinite(lhs) and math.isfinite(rhs):
            worst = max(worst, lhs - rhs)
        elif lhs == PLUS_INF and rhs != PLUS_INF:
            worst = PLUS_INF
    recs.append(
        Record("conjugate_of_sum_below_infconv", "(sum f)* <= f1* [] ... [] fm*", _status(worst <= 1e-6), max(worst, 0.0))
    )
    bad = []
    for x in (-1.0, 0.5, 1.0, 2.0):
        for e in (0.0, 0.3):
            inner = sum_rule_rhs(list(EXAMPLE), x, e, cfg.grids, strict=True)
            upper = subdiff_enumerate(total, x, e, tabulate_conjugate(total, cfg.a_grid, cfg.x_grid)).members
            if not within_dilation(inner, upper, step).all():
                bad.append((x, e))
    recs.append(
        Record(
            "sum_of_subdiffs_inside",
            "union of sums of eps_i-subdifferentials lies in the eps-subdifferential of the sum",
            _status(not bad),
            float(len(bad)),
            {"violations": bad},
        )
    )
    r = check_inclusion_with_factor(list(EXAMPLE), 1.0, 0.0, 2.0, cfg.grids)
    recs.append(
        Record("inclusion_K_example", "exact sum rule with factor K at x = 1", _status(r.holds), float(len(r.violations)), {"lhs": r.lhs})
    )
    x = float(cfg.x_grid.points[np.argmin(np.abs(cfg.x_grid.points - math.pi / 2))])
    r = check_inclusion_with_factor([COS, NEGCOS], x, 0.01, 2.0, cfg.grids)
    recs.append(
        Record(
            "inclusion_K_fails_nonconvex",
            "the factor-K inclusion fails without H-convexity",
            _status(not r.holds),
            0.0,
            {"x": x, "lhs_size": len(r.lhs), "rhs_size": len(r.rhs)},
        )
    )
    for eps in (0.0, 0.5):
        rep = check_sum_rule(list(EXAMPLE), 1.0, eps, (0.1, 0.01), cfg.grids)
        for v in rep.verdicts:
            recs.append(
                Record(
                    f"sum_rule_eps{eps:g}_eta{v.eta:g}",
                    "eps-subdifferential sum rule",
                    _status(v.lhs_in_rhs and v.rhs_in_upper),
                    float(len(v.missing) + len(v.excess)),
                    {"lhs_in_rhs": v.lhs_in_rhs, "rhs_in_upper": v.rhs_in_upper, "n_lhs": v.n_lhs, "n_rhs": v.n_rhs},
                )
            )
    return recs


# ------------------------------------------------------------------- duality


def random_sampled_instance(rng: np.random.Generator, grid: Grid1D, m: int) -> list[ExtFunction]:
    xs = grid.points
    fs = []
    for i in range(m):
        c = rng.normal(size=4)
        vals = c[0] * xs**2 + c[1] * np.abs(xs) + c[2] * np.sin(3 * xs) + c[3] * xs**4 + rng.normal(scale=0.1, size=len(xs))
        holes = rng.random(len(xs)) < 0.1
        vals[holes] = PLUS_INF
        fs.append(ExtFunction(f"g{i}", grid=grid, values=vals))
    return fs


def check_weak_duality_random(tol: float) -> Record:
    rng = np.random.default_rng(SEED)
    xg = Grid1D(-2.0, 2.0, 0.02)
    ag = Grid1D(-5.0, 5.0, 0.05)
    worst, gaps = -PLUS_INF, []
    for k in range(N_WEAK_DUALITY):
        fs = random_sampled_instance(rng, xg, 2 + k % 2)
        vp, _ = primal_value(fs, xg)
        vd, _, _ = dual_value([tabulate_conjugate(f, ag, xg) for f in fs], ag)
        worst = max(worst, vd - vp)
        gaps.append(vp - vd)
    return Record(
        "weak_duality_random",
        "v(P) >= v(D)",
        _status(worst <= tol),
        max(worst, 0.0),
        {"instances": N_WEAK_DUALITY, "min_gap": float(np.min(gaps)), "max_gap": float(np.max(gaps))},
    )


def check_duality(cfg: RunConfig, tol: float) -> tuple[list[Record], GapReport]:
    recs = []
    fs = list(EXAMPLE)
    grids = cfg.grids
    conjs = [tabulate_conjugate(f, cfg.a_grid, cfg.x_grid) for f in fs]
    vp, argmin = primal_value(fs, cfg.x_grid)
    err = abs(vp + 1.0)
    recs.append(
        Record(
            "primal_optimum",
            "optimal value -1 at x = +-1",
            _status(err <= max(1e-4, tol * 0.02) and abs(abs(argmin) - 1.0) <= 2 * max(cfg.x_grid.step, 1e-3)),
            err,
            {"argmin": argmin, "value": vp},
        )
    )
    alt = primal_via_conjugate(fs, cfg.x_grid)
    recs.append(Record("primal_routes", "v(P) = -(sum f)*(0)", _status(abs(vp - alt) <= tol), abs(vp - alt)))
    vd, witness, _ = dual_value(conjs, cfg.a_grid)
    recs.append(
        Record(
            "zero_duality_gap",
            "zero duality gap for the example",
            _status(abs(vp - vd) <= tol),
            abs(vp - vd),
            {"v_primal": vp, "v_dual": vd, "witness": [w.a for w in witness] if witness else None},
        )
    )
    recs.append(Record("weak_duality_example", "v(P) >= v(D)", _status(vd <= vp + tol), max(0.0, vd - vp)))
    ladder36 = (0.0,) + tuple(cfg.eps_ladder)
    r36 = {}
    for x in (1.0, -1.0):
        r = certify_gap_at_point(fs, conjs, x, ladder36, grids, tol)
        r36[x] = r
        dec = r.eps_ladder_certificates[0].decomposition if r.eps_ladder_certificates else None
        recs.append(
            Record(
                f"optimality_certificate_x{x:+g}",
                "subdifferentials at +-1 sum to {0}",
                _status(r.certified),
                0.0,
                {"decomposition_eps0": dec, "depth": r.certified_depth, "reason": r.reason},
            )
        )
    r0 = certify_gap_at_point(fs, conjs, 0.0, tuple(cfg.eps_ladder), grids, tol)
    recs.append(
        Record(
            "no_certificate_at_0",
            "x = 0 is not a solution",
            _status(not r0.certified),
            0.0,
            {"depth": r0.certified_depth, "value_at_0": float(sum_functions(fs).sample(np.array([0.0]))[0])},
        )
    )
    r35 = certify_gap_ladder(fs, conjs, tuple(cfg.eps_ladder), grids, tol)
    deep = len(cfg.eps_ladder) >= 2 and min(cfg.eps_ladder) <= 0.1 * max(cfg.eps_ladder)
    status = (PASS if deep else INDETERMINATE) if r35.certified else FAIL
    recs.append(
        Record(
            "zero_gap_ladder",
            "0 lies in the intersection over eps of sums of eps-subdifferentials",
            status,
            r35.gap,
            {
                "certified_depth": r35.certified_depth,
                "min_certified_eps": r35.min_certified_eps,
                "conj_sum_at_zero": r35.conj_sum_at_zero,
                "infconv_at_zero": r35.infconv_at_zero,
                "reason": r35.reason,
            },
        )
    )
    bad = []
    for x, r in r36.items():
        if not r.certified:
            continue
        dec = r.eps_ladder_certificates[0].decomposition
        for e in cfg.eps_ladder:
            if certificate_margin(fs, conjs, x, dec, e / len(fs)) < -1e-9:
                bad.append((x, e))
    recs.append(
        Record(
            "pointwise_implies_ladder",
            "a certificate at a point gives ladder certificates at that point",
            _status(not bad and all(r.certified for r in r36.values())),
            float(len(bad)),
        )
    )
    bad = []
    for r, each in [(r35, lambda e: e / len(fs))] + [(r, lambda e: e) for r in r36.values()]:
        for c in r.eps_ladder_certificates:
            if sum(c.decomposition) != 0.0:
                bad.append(("sum", c.eps))
            for f, cj, a in zip(fs, conjs, c.decomposition):
                if not subdiff_contains(f, c.x_witness, each(c.eps), QuadLinear(a), cj):
                    bad.append((f.name, c.eps))
    recs.append(Record("certificates_revalidate", PLUMBING, _status(not bad), float(len(bad)), {"failures": bad[:5]}))
    r = certify_gap_ladder([F2, F3], None, tuple(cfg.eps_ladder), grids, tol)
    recs.append(
        Record(
            "unbounded_pair",
            "f2 + f3 is unbounded below",
            _status(r.reason == "unbounded" and r.v_primal == -PLUS_INF and r.v_dual == -PLUS_INF),
            0.0,
            {"reason": r.reason},
        )
    )
    r = certify_gap_ladder([F1, ZERO_FN], None, tuple(cfg.eps_ladder), grids, tol)
    err = max(abs(r.v_primal + 0.25), abs(r.v_dual + 0.25))
    recs.append(Record("f1_with_zero", "v(P) = v(D) = -1/4 for f1 + 0", _status(err <= tol), err))
    c2 = tabulate_conjugate(F2, cfg.a_grid, cfg.x_grid)
    vd2, _, pruned = dual_value([c2, c2], cfg.a_grid)
    recs.append(Record("dual_all_pruned", "infimum over the empty set is +inf", _status(pruned and vd2 == -PLUS_INF), 0.0))
    cg = tabulate_conjugate(phi_function(1.0), cfg.a_grid, cfg.x_grid)
    vdq, _, _ = dual_value([cg, cg], cfg.a_grid)
    recs.append(Record("dual_convex_quadratic", "zero gap for a convex quadratic", _status(abs(vdq) <= tol), abs(vdq)))
    recs.append(check_weak_duality_random(tol))
    return recs, r35


# ---------------------------------------------------------------- structure


def check_structure(cfg: RunConfig) -> list[Record]:
    recs = []
    grids = cfg.grids
    cases = [
        (phi_function(2.0), LClass.MEMBER_OF_L, 2.0),
        (INDICATOR_ZERO, LClass.INDICATOR_OF_ZERO, None),
        (ABS, LClass.NOT_L_CONVEX, None),
    ]
    for f, kind, a in cases:
        got = classify_L_convex(f, grids)
        ok = got.kind == kind and (a is None or abs(got.a - a) <= 1e-9)
        recs.append(Record(f"L_class_{f.name}", "L-convex functions are phi_a or the indicator of {0}", _status(ok), 0.0, {"got": got.kind.value}))
    line = np.array([(t, -t) for t in np.linspace(-5, 5, 11)])
    vertical = np.array([(0.0, float(n)) for n in range(1, 41)])
    pair = np.array([(-1.0, 0.0), (1.0, 0.0)])
    regions = [
        ("line", FiniteRegion(line), HRegionVerdict.H_CONVEX_CERTIFIED),
        ("vertical", FiniteRegion(vertical), HRegionVerdict.FAILS_FINITE_SUP),
        ("pair", FiniteRegion(pair, convex_hull=False, downward_closed=False), HRegionVerdict.FAILS_CONVEX),
    ]
    for name, region, want in regions:
        got = check_H_convex_region(region, grids=grids)
        recs.append(Record(f"H_region_{name}", "sufficient conditions for an H-convex parameter set", _status(got == want), 0.0, {"got": got.value}))
    return recs



def run_verification(cfg: RunConfig) -> VerificationReport:
    tol = scaled_tol(cfg.tol, cfg.grids)
    records: list[Record] = []
    records += check_conjugates(cfg, tol)
    records += check_supports(cfg, tol)
    records += check_fenchel_moreau(cfg, tol)
    records += check_fenchel_young(cfg)
    records += check_subdifferentials(cfg, tol)
    records += check_subdiff_properties(cfg)
    dual_recs, gap = check_duality(cfg, tol)
    records += dual_recs
    records += check_structure(cfg)
    records.sort(key=lambda r: r.check_id)
    config = cfg.to_dict()
    config["effective_tol"] = tol
    return VerificationReport(config, records, gap)


# ---------------------------------------------------------------- plot data


def objective_curve_rows(cfg: RunConfig, every: int = 10):
    xs = cfg.x_grid.points[::every]
    vals = [f.sample(xs) for f in EXAMPLE]
    total = sum(vals)
    for i, x in enumerate(xs):
        yield (float(x), *(float(v[i]) for v in vals), float(total[i]))


def support_boundary_rows(cfg: RunConfig, every: int = 5):
    a = cfg.a_grid.points[::every]
    rows = []
    tabs = [tabulate_conjugate(f, cfg.a_grid, cfg.x_grid).values[::every] for f in EXAMPLE]
    for i, av in enumerate(a):
        oracle = [-t[i] for t in tabs]
        closed = [-closed_conjugate(f.name, av) for f in EXAMPLE]
        rows.append((float(av), *oracle, *closed))
    return rows
