"""epsilon-subdifferentials over phi_a, their sums, and inclusion checks.

phi_a belongs to the eps-subdifferential of f at x iff the slack

    s(a) = f*(phi_a) + f(x) - a x^2

is at most eps. s is convex in a, so its sublevel sets are intervals and a
grid sample can be refined by convexity: between two grid points s is
bounded below by the secants extended from either side. A grid point is
reported as a member when s <= eps + tol there, or when it borders a gap
on which that lower bound reaches eps + tol (the true set may pass
between samples). An empty result is therefore a certificate of emptiness
over the a-window.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import PLUS_INF, EmptyIntersection, ExtFunction, Grid1D, Grids, sum_functions
from .quadspace import QuadLinear
from .transforms import ConjugateFn, tabulate_conjugate

DEFAULT_EPS_LADDER = (1.0, 0.3, 0.1, 0.03, 0.01)
SIMPLEX_DIVISIONS = 10


@dataclass(frozen=True)
class SubdiffQuery:
    f: ExtFunction
    x: float
    eps: float

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")


@dataclass(frozen=True, eq=False)
class SubdiffSet:
    """Grid members of an eps-subdifferential.

    ``strict`` holds the grid points passing the membership predicate, so
    it is monotone in eps. ``members`` adds the two ends of any gap the set
    passes through without touching a sample; it lies within one a-step of
    the true set. Empty ``members`` certifies emptiness over the a-window.
    """

    members: np.ndarray
    emptiness_certified: bool
    step: float
    x: float = float("nan")
    eps: float = float("nan")
    strict: np.ndarray = field(default_factory=lambda: np.array([]))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def empty(self) -> bool:
        return len(self.members) == 0

    def as_linear(self) -> list[QuadLinear]:
        return [QuadLinear(float(a)) for a in self.members]


def slack_matrix(f: ExtFunction, xs, conj: ConjugateFn) -> tuple[np.ndarray, np.ndarray]:
    """Slack s(x, a) = f*(phi_a) + f(x) - a x^2 and a subgradient of it in a.

    Rows run over xs. The subgradient comes from the maximiser stored with
    each conjugate entry: x_arg^2 - x^2. Both are +inf off the domains.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    fx = f.sample(xs)
    a = conj.points
    x2 = np.square(xs)[:, None]
    with np.errstate(invalid="ignore"):
        S = conj.values[None, :] + fx[:, None] - x2 * a[None, :]
    D = np.square(conj.argmax)[None, :] - x2
    bad = np.isinf(fx)[:, None] | np.isinf(conj.values)[None, :]
    S = np.where(bad, PLUS_INF, S)
    D = np.where(bad, np.nan, D)
    return S, D


def _gap_lower_bound(S: np.ndarray, D: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Lower bound of s on each gap [a_j, a_{j+1}], shape (rows, n-1).

    s is convex in a, so the tangent lines at both ends minorise it; the
    bound is the minimum over the gap of their maximum.
    """
    rows, n = S.shape
    if n < 2:
        return np.full((rows, 0), PLUS_INF)
    s0, s1 = S[:, :-1], S[:, 1:]
    d0, d1 = D[:, :-1], D[:, 1:]
    a0, a1 = a[:-1][None, :], a[1:][None, :]
    ok0, ok1 = np.isfinite(s0), np.isfinite(s1)

    def line0(t):
        return np.where(ok0, s0 + np.where(ok0, d0, 0.0) * (t - a0), -np.inf)

    def line1(t):
        return np.where(ok1, s1 + np.where(ok1, d1, 0.0) * (t - a1), -np.inf)

    with np.errstate(invalid="ignore", divide="ignore"):
        lb = np.minimum(np.maximum(line0(a0), line1(a0)), np.maximum(line0(a1), line1(a1)))
        both = ok0 & ok1 & (d0 != d1)
        denom = np.where(both, d0 - d1, 1.0)
        t = (s1 - s0 + np.where(both, d0, 0.0) * a0 - np.where(both, d1, 0.0) * a1) / denom
        inside = both & (t > a0) & (t < a1)
        lb = np.where(inside, np.minimum(lb, line0(np.where(inside, t, a0))), lb)
    lb = np.where(~ok0 & ~ok1, PLUS_INF, lb)
    return np.where(np.isnan(lb), PLUS_INF, lb)


def member_mask(S: np.ndarray, D: np.ndarray, a: np.ndarray, thr) -> tuple[np.ndarray, np.ndarray]:
    """Grid members of {s <= thr} per row: (bracketed, strict).

    ``strict`` marks points passing the predicate outright and grows
    monotonically with thr. ``bracketed`` adds both ends of every gap whose
    ends both fail but on which the tangent bound reaches thr: the set may
    pass between those samples. Bracketed sets stay within one step of the
    true sublevel set (in Hausdorff distance) but are not monotone in thr.
    """
    thr = np.asarray(thr, dtype=float)
    thr_col = thr[:, None] if thr.ndim == 1 else thr
    strict = S <= thr_col
    mask = strict.copy()
    if S.shape[1] >= 2:
        gap_ok = (_gap_lower_bound(S, D, a) <= thr_col) & ~strict[:, :-1] & ~strict[:, 1:]
        mask[:, :-1] |= gap_ok
        mask[:, 1:] |= gap_ok
    return mask, strict


def subdiff_contains(
    f: ExtFunction, x: float, eps: float, l: QuadLinear, conj: ConjugateFn, tol: float = 1e-9
) -> bool:
    """phi_a in the eps-subdifferential, via f*(l) + f(x) <= l(x) + eps."""
    fx = float(f.sample(np.array([x]))[0])
    if fx == PLUS_INF:
        return False
    c = conj(l.a)
    if c == PLUS_INF:
        return False
    return c + fx <= l.a * x * x + eps + tol


def membership_slack(f: ExtFunction, x: float, eps: float, l: QuadLinear, conj: ConjugateFn) -> float:
    """l(x) + eps - f*(l) - f(x): nonnegative exactly for members."""
    fx = float(f.sample(np.array([x]))[0])
    c = conj(l.a)
    if fx == PLUS_INF or c == PLUS_INF:
        return -PLUS_INF
    return l.a * x * x + eps - c - fx


def subdiff_enumerate(f: ExtFunction, x: float, eps: float, conj: ConjugateFn, tol: float = 1e-9) -> SubdiffSet:
    SubdiffQuery(f, x, eps)
    S, D = slack_matrix(f, [x], conj)
    mask, strict = member_mask(S, D, conj.points, eps + tol)
    members = conj.points[mask[0]].copy()
    return SubdiffSet(
        members, len(members) == 0, conj.a_grid.step, float(x), float(eps), conj.points[strict[0]].copy()
    )


def subdiff_sets(f: ExtFunction, xs, eps: float, conj: ConjugateFn, tol: float = 1e-9) -> np.ndarray:
    """Membership mask for many x at once, shape (len(xs), len(a-grid))."""
    out = []
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    per = max(1, 2_000_000 // len(conj.points))
    for i in range(0, len(xs), per):
        S, D = slack_matrix(f, xs[i : i + per], conj)
        out.append(member_mask(S, D, conj.points, eps + tol)[0])
    return np.concatenate(out, axis=0)


def domain_map(f: ExtFunction, eps: float, x_grid: Grid1D, conj: ConjugateFn, tol: float = 1e-9) -> np.ndarray:
    """Grid x where the eps-subdifferential has a member in the a-window."""
    xs = x_grid.points
    return xs[np.any(subdiff_sets(f, xs, eps, conj, tol), axis=1)].copy()


def _dedup(values: np.ndarray, step: float) -> np.ndarray:
    keys = np.unique(np.rint(np.asarray(values) / step).astype(np.int64))
    return np.round(keys * step, 12)


def minkowski_sum_subdiffs(
    sets: Sequence[SubdiffSet], step: float | None = None, strict: bool = False
) -> np.ndarray:
    """All sums of one member from each set, deduplicated at the a-resolution.

    With ``strict`` only members passing the predicate outright are summed.
    """
    if not sets:
        return np.array([])
    step = step or sets[0].step
    pick = (lambda s: s.strict) if strict else (lambda s: s.members)
    acc = np.asarray(pick(sets[0]), dtype=float)
    for s in sets[1:]:
        if len(acc) == 0 or len(pick(s)) == 0:
            return np.array([])
        acc = _dedup(np.add.outer(acc, pick(s)).ravel(), step)
    return _dedup(acc, step) if len(acc) else acc


def within_dilation(points: np.ndarray, target: np.ndarray, radius: float) -> np.ndarray:
    """For each point, whether some target lies within ``radius``."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return np.zeros(0, dtype=bool)
    if len(target) == 0:
        return np.zeros(len(points), dtype=bool)
    t = np.sort(target)
    j = np.clip(np.searchsorted(t, points), 1, len(t)) if len(t) > 1 else np.zeros(len(points), dtype=int)
    if len(t) == 1:
        d = np.abs(points - t[0])
    else:
        d = np.minimum(np.abs(points - t[j - 1]), np.abs(points - t[np.minimum(j, len(t) - 1)]))
    return d <= radius + 1e-9


def inner_members(s: SubdiffSet) -> np.ndarray:
    """Members used on the contained side of an inclusion.

    Strict members when there are any, so bracketing slack is not counted
    twice; otherwise the bracketed ones (a set strictly between samples).
    """
    return s.strict if len(s.strict) else s.members


def _require_common_domain(fs: Sequence[ExtFunction], x: float) -> None:
    for f in fs:
        if float(f.sample(np.array([x]))[0]) == PLUS_INF:
            raise EmptyIntersection(f"x={x} is outside dom {f.name}")


@dataclass(frozen=True)
class InclusionReport:
    holds: bool
    lhs: np.ndarray
    rhs: np.ndarray
    violations: np.ndarray
    x: float
    eps: float
    K: float


def check_inclusion_with_factor(
    fs: Sequence[ExtFunction],
    x: float,
    eps: float,
    K: float,
    grids: Grids = Grids(),
    tol: float = 1e-9,
) -> InclusionReport:
    """Sample check of d_eps(sum f)(x) being inside sum_i d_{K eps} f_i(x).

    The left side is taken by ``inner_members``, the right side bracketed
    and dilated by one a-grid step. A point outside some domain gives an
    empty left side, so the inclusion holds vacuously.
    """
    if K <= 1:
        raise ValueError(f"K must exceed 1, got {K}")
    total = sum_functions(fs)
    step = grids.a.step
    if float(total.sample(np.array([x]))[0]) == PLUS_INF:
        empty = np.array([])
        return InclusionReport(True, empty, empty, empty, x, eps, K)
    lhs = inner_members(subdiff_enumerate(total, x, eps, tabulate_conjugate(total, grids.a, grids.x), tol))
    parts = [subdiff_enumerate(f, x, K * eps, tabulate_conjugate(f, grids.a, grids.x), tol) for f in fs]
    rhs = minkowski_sum_subdiffs(parts, step)
    ok = within_dilation(lhs, rhs, step)
    return InclusionReport(bool(np.all(ok)), lhs, rhs, lhs[~ok], x, eps, K)


def simplex_lattice(m: int, total: float, divisions: int = SIMPLEX_DIVISIONS) -> list[tuple[float, ...]]:
    """(eps_1, ..., eps_m) >= 0 summing to ``total`` on a uniform lattice."""
    pts = []
    for combo in itertools.product(range(divisions + 1), repeat=m - 1):
        rest = divisions - sum(combo)
        if rest >= 0:
            pts.append(tuple(total * k / divisions for k in (*combo, rest)))
    return pts


@dataclass(frozen=True)
class EtaVerdict:
    eta: float
    lhs_in_rhs: bool
    rhs_in_upper: bool
    n_lhs: int
    n_rhs: int
    missing: np.ndarray = field(repr=False)
    excess: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SumRuleReport:
    x: float
    eps: float
    verdicts: list[EtaVerdict]

    @property
    def holds(self) -> bool:
        return all(v.lhs_in_rhs and v.rhs_in_upper for v in self.verdicts)


def sum_rule_rhs(
    fs: Sequence[ExtFunction], x: float, total_eps: float, grids: Grids, tol: float = 1e-9, strict: bool = False
) -> np.ndarray:
    """Union over eps_1 + ... + eps_m = total_eps of sum_i d_{eps_i} f_i(x)."""
    conjs = [tabulate_conjugate(f, grids.a, grids.x) for f in fs]
    cache: dict = {}

    def part(i, e):
        key = (i, round(e, 12))
        if key not in cache:
            cache[key] = subdiff_enumerate(fs[i], x, e, conjs[i], tol)
        return cache[key]

    union = []
    for split in simplex_lattice(len(fs), total_eps):
        union.append(minkowski_sum_subdiffs([part(i, e) for i, e in enumerate(split)], grids.a.step, strict))
    union = [u for u in union if len(u)]
    return _dedup(np.concatenate(union), grids.a.step) if union else np.array([])


def check_sum_rule(
    fs: Sequence[ExtFunction],
    x: float,
    eps: float,
    eta_ladder: Sequence[float],
    grids: Grids = Grids(),
    tol: float = 1e-9,
) -> SumRuleReport:
    """Two-sided sample check of the eps-subdifferential sum rule at x.

    For each eta, with R(eta) the union of sums of d_{eps_i} f_i(x) over the
    simplex sum(eps_i) = eps + eta:
      * d_eps(sum f)(x) lies in R(eta) dilated by one a-step, and
      * R(eta) lies in d_{eps+eta}(sum f)(x) dilated by one a-step.
    The intersection over eta > 0 of the first is the closed sum rule; the
    second is the elementary reverse inclusion at level eps + eta. Each
    contained side uses strict members, each containing side bracketed ones.
    """
    _require_common_domain(fs, x)
    total = sum_functions(fs)
    tconj = tabulate_conjugate(total, grids.a, grids.x)
    step = grids.a.step
    lhs = inner_members(subdiff_enumerate(total, x, eps, tconj, tol))
    verdicts = []
    for eta in eta_ladder:
        rhs = sum_rule_rhs(fs, x, eps + eta, grids, tol)
        rhs_inner = sum_rule_rhs(fs, x, eps + eta, grids, tol, strict=True)
        upper = subdiff_enumerate(total, x, eps + eta, tconj, tol).members
        ok1 = within_dilation(lhs, rhs, step)
        ok2 = within_dilation(rhs_inner, upper, step)
        verdicts.append(
            EtaVerdict(
                float(eta), bool(np.all(ok1)), bool(np.all(ok2)), len(lhs), len(rhs), lhs[~ok1], rhs_inner[~ok2]
            )
        )
    return SumRuleReport(float(x), float(eps), verdicts)
