"""Primal and dual values, the duality gap and zero-gap certificates.

The primal value is the grid minimum of the sum; the dual value is minus
the infimal convolution of the conjugates at phi_0. A certificate for a
tolerance level eps is a point x together with a decomposition
a_1 + ... + a_m = 0 (the last coefficient closes the sum exactly) such that
each phi_{a_i} is an eps_i-subgradient of f_i at x.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    PLUS_INF,
    AbconvexError,
    AllInfinite,
    EmptyIntersection,
    ExtFunction,
    Grid1D,
    Grids,
    grid_sup,
    sum_functions,
)
from .quadspace import QuadLinear
from .subdiff import DEFAULT_EPS_LADDER, slack_matrix, subdiff_sets
from .transforms import ConjugateFn, conjugate, inf_convolution, tabulate_conjugate

DEFAULT_TOL = 5e-3
MEMBER_TOL = 1e-9
# how far (in a-steps) the neighbourhood search moves away from the seed
NEIGHBOURHOOD = 5
# candidate points tried by the full sweep before giving up on a rung
SWEEP_CANDIDATES = 64


class DualUnboundedError(AbconvexError):
    """The sum is unbounded below: the escape test fired on its negation."""


def grid_scale(grids: Grids) -> float:
    """Discretisation scale 2 x_step + a_step max|x|^2 of a grid pair."""
    xmax = max(abs(grids.x.lo), abs(grids.x.hi))
    return 2 * grids.x.step + grids.a.step * xmax**2


def scaled_tol(tol: float, grids: Grids) -> float:
    """``tol`` for the default grids, relaxed in proportion on coarser ones."""
    return tol * max(1.0, grid_scale(grids) / grid_scale(Grids()))


def primal_value(fs: Sequence[ExtFunction], x_grid: Grid1D) -> tuple[float, float]:
    """Grid minimum of the sum and its smallest minimiser."""
    total = sum_functions(fs)

    def neg(xs):
        v = total.sample(xs)
        return np.where(np.isinf(v), -np.inf, -v)

    try:
        res = grid_sup(neg, x_grid)
    except AllInfinite as exc:
        raise EmptyIntersection("the domains do not meet on the grid") from exc
    if res.unbounded:
        raise DualUnboundedError(f"{total.name} is unbounded below")
    return -res.value, res.argmax


def primal_via_conjugate(fs: Sequence[ExtFunction], x_grid: Grid1D) -> float:
    """The same value through -(sum f)*(phi_0)."""
    return -conjugate(sum_functions(fs), 0.0, x_grid)


def dual_value(conjs: Sequence[ConjugateFn], a_grid: Grid1D):
    """(value, witness, all_pruned); value is -inf when every split was pruned."""
    ic = inf_convolution(conjs, QuadLinear(0.0), a_grid)
    if ic.value == PLUS_INF:
        return -PLUS_INF, None, True
    return 0.0 - ic.value, ic.witness, False


@dataclass(frozen=True)
class LadderCertificate:
    eps: float
    x_witness: float
    decomposition: tuple[float, ...]
    slack: float  # smallest membership margin over the components


@dataclass
class GapReport:
    v_primal: float
    primal_argmin: Optional[float]
    v_dual: float
    dual_witness: Optional[tuple[float, ...]]
    gap: float
    eps_ladder: tuple[float, ...]
    eps_ladder_certificates: list[LadderCertificate] = field(default_factory=list)
    certificate_point: Optional[float] = None
    conj_sum_at_zero: float = float("nan")
    infconv_at_zero: float = float("nan")
    tol: float = DEFAULT_TOL
    reason: str = ""

    @property
    def certified_depth(self) -> int:
        """Number of leading ladder rungs that carry a certificate."""
        have = {c.eps for c in self.eps_ladder_certificates}
        d = 0
        for e in self.eps_ladder:
            if e not in have:
                break
            d += 1
        return d

    @property
    def min_certified_eps(self) -> Optional[float]:
        d = self.certified_depth
        return self.eps_ladder[d - 1] if d else None

    @property
    def ladder_certified(self) -> bool:
        return self.certified_depth == len(self.eps_ladder)

    @property
    def weak_duality(self) -> bool:
        return self.v_dual <= self.v_primal + self.tol

    @property
    def certified(self) -> bool:
        return not self.reason and self.ladder_certified and self.gap <= self.tol


def _margins(fs, conjs, x: float, decomposition, levels) -> np.ndarray:
    """level_i - slack_i at x for each component (-inf off the domains)."""
    out = []
    for f, c, a, lev in zip(fs, conjs, decomposition, levels):
        fx = float(f.sample(np.array([x]))[0])
        ca = c(a)
        out.append(-PLUS_INF if fx == PLUS_INF or ca == PLUS_INF else lev - (ca + fx - a * x * x))
    return np.array(out)


def _close(head: Sequence[float]) -> tuple[float, ...]:
    head = tuple(float(h) + 0.0 for h in head)
    return head + (0.0 - sum(head),)


def _on_lattice(conjs, decomposition) -> bool:
    try:
        for c, a in zip(conjs, decomposition):
            c.at([a])
    except ValueError:
        return False
    return True


def certificate_margin(fs, conjs, x: float, decomposition, eps_each: float) -> float:
    """Smallest membership margin of a decomposition at x."""
    if not _on_lattice(conjs, decomposition):
        return -PLUS_INF
    return float(np.min(_margins(fs, conjs, x, decomposition, [eps_each] * len(fs))))


def certifying_points(
    fs: Sequence[ExtFunction], conjs: Sequence[ConjugateFn], decomposition, eps_each: float, x_grid: Grid1D
) -> np.ndarray:
    """Grid x at which every component of ``decomposition`` is an eps_each-subgradient."""
    xs = x_grid.points
    ok = np.ones(len(xs), dtype=bool)
    x2 = np.square(xs)
    for f, c, a in zip(fs, conjs, decomposition):
        ca = c(a)
        if ca == PLUS_INF:
            return np.array([])
        with np.errstate(invalid="ignore"):
            slack = ca + f.sample(xs) - a * x2
        ok &= slack <= eps_each + MEMBER_TOL
    return xs[ok].copy()


def _best_x_for(fs, conjs, decomposition, eps, x_grid) -> Optional[LadderCertificate]:
    eps_each = eps / len(fs)
    pts = certifying_points(fs, conjs, decomposition, eps_each, x_grid)
    if len(pts) == 0:
        return None
    margins = [certificate_margin(fs, conjs, x, decomposition, eps_each) for x in pts]
    k = int(np.argmax(margins))  # first maximum: smallest x on ties
    return LadderCertificate(float(eps), float(pts[k]), decomposition, float(margins[k]))


def decomposition_at(
    fs: Sequence[ExtFunction], conjs: Sequence[ConjugateFn], x: float, eps_each: float
) -> Optional[tuple[tuple[float, ...], float]]:
    """Best split of phi_0 into eps_each-subgradients at one x, or None.

    Searches strict grid members; the last coefficient closes the sum and
    must land on the lattice. Returns the split with the largest smallest
    margin (lexicographically smallest on ties) and that margin.
    """
    m = len(fs)
    a = conjs[0].points
    slacks = [slack_matrix(f, [x], c)[0][0] for f, c in zip(fs, conjs)]
    members = [np.flatnonzero(s <= eps_each + MEMBER_TOL) for s in slacks]
    if any(len(mem) == 0 for mem in members):
        return None
    grid = conjs[-1].a_grid

    def last_margin(close_vals):
        idx = grid.lookup(close_vals, atol=1e-6 * grid.step)
        s_last = np.where(idx >= 0, slacks[-1][np.maximum(idx, 0)], PLUS_INF)
        return eps_each - s_last

    best, best_key = None, None
    if m == 2:
        heads = members[0]
        marg = np.minimum(eps_each - slacks[0][heads], last_margin(-a[heads]))
        k = int(np.argmax(marg))
        if marg[k] >= -MEMBER_TOL:
            best, best_key = _close([a[heads[k]]]), float(marg[k])
    else:
        for i in members[0]:
            js = members[1]
            close = -(a[i] + a[js])
            marg = np.minimum(eps_each - slacks[0][i], np.minimum(eps_each - slacks[1][js], last_margin(close)))
            k = int(np.argmax(marg))
            if marg[k] >= -MEMBER_TOL and (best_key is None or marg[k] > best_key):
                best, best_key = _close([a[i], a[js[k]]]), float(marg[k])
    if best is None:
        return None
    return best, best_key


def _neighbourhood(seed: tuple[float, ...], step: float, radius: int = NEIGHBOURHOOD):
    offsets = range(-radius, radius + 1)
    head = seed[:-1]
    if len(head) == 1:
        cands = [(head[0] + i * step,) for i in offsets]
    else:
        cands = [(head[0] + i * step, head[1] + j * step) for i in offsets for j in offsets]
    cands.sort(key=lambda h: (sum(abs(u - v) for u, v in zip(h, head)), h))
    for h in cands:
        yield _close(np.round(h, 12))


def _sweep_candidates(fs, conjs, eps_each, x_grid) -> np.ndarray:
    """Grid x where the member intervals of the components can sum to 0."""
    lo = np.zeros(len(x_grid.points))
    hi = np.zeros(len(x_grid.points))
    ok = np.ones(len(x_grid.points), dtype=bool)
    a = conjs[0].points
    for f, c in zip(fs, conjs):
        mask = subdiff_sets(f, x_grid.points, eps_each, c, MEMBER_TOL)
        has = mask.any(axis=1)
        first = np.argmax(mask, axis=1)
        last = mask.shape[1] - 1 - np.argmax(mask[:, ::-1], axis=1)
        ok &= has
        lo += np.where(has, a[first], 0.0)
        hi += np.where(has, a[last], 0.0)
    ok &= (lo <= 1e-9) & (hi >= -1e-9)
    return x_grid.points[ok]


def search_certificate(
    fs: Sequence[ExtFunction],
    conjs: Sequence[ConjugateFn],
    eps: float,
    seed: Optional[tuple[float, ...]],
    grids: Grids,
) -> Optional[LadderCertificate]:
    """A certificate at level eps with eps/m per component, or None.

    Order: the seed decomposition, its lattice neighbourhood, then a sweep
    over x using member intervals to pick candidate points.
    """
    m = len(fs)
    each = eps / m
    if seed is not None:
        for dec in _neighbourhood(seed, grids.a.step):
            if not _on_lattice(conjs, dec):
                continue
            cert = _best_x_for(fs, conjs, dec, eps, grids.x)
            if cert is not None:
                return cert
    for x in _sweep_candidates(fs, conjs, each, grids.x)[:SWEEP_CANDIDATES]:
        found = decomposition_at(fs, conjs, float(x), each)
        if found is not None:
            return LadderCertificate(eps, float(x), found[0], found[1])
    return None


def _values(fs, conjs, grids, tol):
    """Primal and dual sides, both sides of the conjugate identity at phi_0, and a failure reason if any."""
    reason = ""
    try:
        vp, argmin = primal_value(fs, grids.x)
    except DualUnboundedError:
        vp, argmin, reason = -PLUS_INF, None, "unbounded"
    vd, witness, pruned = dual_value(conjs, grids.a)
    if pruned and not reason:
        reason = "dual pruned"
    total = sum_functions(fs)
    lhs = conjugate(total, 0.0, grids.x)
    rhs = -vd
    if vp == -PLUS_INF and vd == -PLUS_INF:
        gap = 0.0
    elif vp == -PLUS_INF or vd == -PLUS_INF:
        gap = PLUS_INF
    else:
        gap = abs(vp - vd)
    return vp, argmin, vd, witness, gap, lhs, rhs, reason


def certify_gap_ladder(
    fs: Sequence[ExtFunction],
    conjs: Optional[Sequence[ConjugateFn]] = None,
    eps_ladder: Sequence[float] = DEFAULT_EPS_LADDER,
    grids: Grids = Grids(),
    tol: float = DEFAULT_TOL,
) -> GapReport:
    """Zero-gap check through ladder certificates at a common x.

    Each rung eps needs a point x and a split of phi_0 into
    eps/m-subgradients of the f_i at x. The report also carries both sides
    of (sum f)*(0) = (f_1* [] ... [] f_m*)(0).
    """
    if not 2 <= len(fs) <= 3:
        raise ValueError(f"need 2 or 3 functions, got {len(fs)}")
    conjs = conjs or [tabulate_conjugate(f, grids.a, grids.x) for f in fs]
    tol_eff = scaled_tol(tol, grids)
    vp, argmin, vd, witness, gap, lhs, rhs, reason = _values(fs, conjs, grids, tol_eff)
    seed = tuple(w.a for w in witness) if witness else None
    report = GapReport(vp, argmin, vd, seed, gap, tuple(eps_ladder), [], None, lhs, rhs, tol_eff, reason)
    if reason:
        return report
    for eps in eps_ladder:
        cert = search_certificate(fs, conjs, eps, seed, grids)
        if cert is None:
            break
        report.eps_ladder_certificates.append(cert)
    if not report.ladder_certified:
        report.reason = f"no certificate at eps={eps_ladder[report.certified_depth]:g}"
    elif gap > tol_eff:
        report.reason = "gap exceeds tol"
    return report


def certify_gap_at_point(
    fs: Sequence[ExtFunction],
    conjs: Optional[Sequence[ConjugateFn]],
    x: float,
    eps_ladder: Sequence[float] = DEFAULT_EPS_LADDER,
    grids: Grids = Grids(),
    tol: float = DEFAULT_TOL,
) -> GapReport:
    """Optimality certificate at a given point x.

    Each rung eps needs a split of phi_0 into eps-subgradients of the f_i
    all taken at x. When every rung is certified, x must also attain the
    primal value and both sides of the conjugate identity must agree.
    """
    for f in fs:
        if float(f.sample(np.array([x]))[0]) == PLUS_INF:
            raise EmptyIntersection(f"x={x} is outside dom {f.name}")
    conjs = conjs or [tabulate_conjugate(f, grids.a, grids.x) for f in fs]
    tol_eff = scaled_tol(tol, grids)
    vp, argmin, vd, witness, gap, lhs, rhs, reason = _values(fs, conjs, grids, tol_eff)
    report = GapReport(
        vp,
        argmin,
        vd,
        tuple(w.a for w in witness) if witness else None,
        gap,
        tuple(eps_ladder),
        [],
        float(x),
        lhs,
        rhs,
        tol_eff,
        reason,
    )
    if reason:
        return report
    for eps in eps_ladder:
        found = decomposition_at(fs, conjs, x, eps)
        if found is None:
            break
        report.eps_ladder_certificates.append(LadderCertificate(float(eps), float(x), found[0], found[1]))
    if not report.ladder_certified:
        report.reason = f"no certificate at eps={eps_ladder[report.certified_depth]:g}"
        return report
    value_at_x = float(sum_functions(fs).sample(np.array([x]))[0])
    if abs(vp - value_at_x) > tol_eff:
        report.reason = "x does not attain the primal value"
    elif abs(lhs - rhs) > tol_eff:
        report.reason = "conjugate identity off by more than tol"
    elif gap > tol_eff:
        report.reason = "gap exceeds tol"
    return report
