"""Conjugates, biconjugates, infimal convolutions and support sets over phi_a.

The conjugate of f at phi_a is ``sup_x a x^2 - f(x)``. As a function of a it
is an upper envelope of lines with slopes x^2, hence convex; tables are
computed for a whole a-grid in one batched sweep.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .core import (
    PLUS_INF,
    REFINE_POINTS,
    AllInfinite,
    EmptyDomain,
    ExtFunction,
    Grid1D,
    escape_sweep,
    grid_sup,
    sum_functions,
)
from .quadspace import QuadAffine, QuadLinear


@dataclass(frozen=True, eq=False)
class ConjugateFn:
    """f* either tabulated on an a-grid or given in closed form.

    A tabulated conjugate reads +inf outside its grid range (the discretised
    space only contains those phi_a); in-range queries must hit the lattice.
    """

    source: str
    a_grid: Optional[Grid1D] = None
    values: Optional[np.ndarray] = None
    argmax: Optional[np.ndarray] = None
    unbounded: Optional[np.ndarray] = None
    closed: Optional[Callable[[float], float]] = None

    def at(self, a_values) -> np.ndarray:
        a = np.atleast_1d(np.asarray(a_values, dtype=float))
        if self.values is None:
            return np.array([self.closed(float(v)) for v in a], dtype=float)
        g = self.a_grid
        idx = g.lookup(a, atol=1e-6 * g.step)
        inside = (a >= g.lo - 1e-9) & (a <= g.points[-1] + 1e-9)
        if np.any(inside & (idx < 0)):
            bad = a[inside & (idx < 0)][0]
            raise ValueError(f"{self.source}*: a={bad} is off the a-grid lattice")
        return np.where(idx >= 0, self.values[np.maximum(idx, 0)], PLUS_INF)

    def __call__(self, a: float) -> float:
        return float(self.at([a])[0])

    @property
    def points(self) -> np.ndarray:
        return self.a_grid.points


_cache: dict = {}
_cache_lock = threading.Lock()


def _conj_rows(f: ExtFunction, a_pts: np.ndarray):
    def rows_fn(pts, rows):
        fx = f.sample(pts)
        with np.errstate(invalid="ignore"):
            out = a_pts[rows, None] * np.square(pts)[None, :] - fx[None, :]
        return np.where(np.isinf(fx)[None, :], -np.inf, out)

    return rows_fn


def _conj_local(f: ExtFunction, a_pts: np.ndarray):
    def local_fn(P, rows):
        fx = f.sample(P)
        with np.errstate(invalid="ignore"):
            out = a_pts[rows, None] * np.square(P) - fx
        return np.where(np.isinf(fx), -np.inf, out)

    return local_fn


def tabulate_conjugate(f: ExtFunction, a_grid: Grid1D, x_grid: Grid1D) -> ConjugateFn:
    """f* on every a-grid point, cached per (function, a-grid, x-grid)."""
    key = (id(f), f.name, a_grid, x_grid)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None and hit[0] is f:
        return hit[1]
    a_pts = a_grid.points
    try:
        vals, arg, unb = escape_sweep(
            _conj_rows(f, a_pts), len(a_pts), x_grid, refine=REFINE_POINTS, local_fn=_conj_local(f, a_pts)
        )
    except AllInfinite as exc:
        raise EmptyDomain(f"{f.name} is +inf on the whole sweep") from exc
    for arr in (vals, arg, unb):
        arr.flags.writeable = False
    table = ConjugateFn(f.name, a_grid, vals, arg, unb)
    with _cache_lock:
        # identical values on a race, so last write wins harmlessly
        _cache[key] = (f, table)
    return table


def conjugate_values(f: ExtFunction, a_values, x_grid: Grid1D) -> np.ndarray:
    """f* at arbitrary coefficients (no lattice, no caching); +inf where it escapes."""
    a_pts = np.atleast_1d(np.asarray(a_values, dtype=float))
    try:
        vals, _, _ = escape_sweep(
            _conj_rows(f, a_pts), len(a_pts), x_grid, refine=REFINE_POINTS, local_fn=_conj_local(f, a_pts)
        )
    except AllInfinite as exc:
        raise EmptyDomain(f"{f.name} is +inf on the whole sweep") from exc
    return vals


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()


def conjugate(f: ExtFunction, a: float, x_grid: Grid1D) -> float:
    """f*(phi_a) by a single escape-tested sweep; +inf when it escapes."""

    def g(xs):
        fx = f.sample(xs)
        return np.where(np.isinf(fx), -np.inf, a * np.square(xs) - fx)

    try:
        res = grid_sup(g, x_grid, refine=REFINE_POINTS)
    except AllInfinite as exc:
        raise EmptyDomain(f"{f.name} is +inf on the whole sweep") from exc
    return PLUS_INF if res.unbounded else res.value


# a-window for biconjugates: sup over phi_a may need a -> -inf (f2** at 0 is
# reached only in the limit), so a coarse tail extends the fine default window
BICONJ_A_GRIDS = (Grid1D(-1000.0, -10.0, 0.5), Grid1D(-10.0, 20.0, 0.01))


def biconjugate_values(f: ExtFunction, xs, a_grid, x_grid: Grid1D) -> np.ndarray:
    """f**(x) = sup_a a x^2 - f*(phi_a) over the finite part of the a-grid(s).

    ``a_grid`` is one ``Grid1D`` or a sequence of them; the sup runs over all.
    """
    grids = (a_grid,) if isinstance(a_grid, Grid1D) else tuple(a_grid)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.full(len(xs), -np.inf)
    for g in grids:
        conj = tabulate_conjugate(f, g, x_grid)
        fin = np.isfinite(conj.values)
        a = g.points[fin]
        c = conj.values[fin]
        per = max(1, 2_000_000 // max(1, len(a)))
        for i in range(0, len(xs), per):
            x2 = np.square(xs[i : i + per])
            part = np.max(x2[:, None] * a[None, :] - c[None, :], axis=1)
            out[i : i + per] = np.maximum(out[i : i + per], part)
    return out


def biconjugate(f: ExtFunction, x: float, a_grid, x_grid: Grid1D) -> float:
    return float(biconjugate_values(f, [x], a_grid, x_grid)[0])


class InfConvResult(NamedTuple):
    value: float
    witness: Optional[tuple[QuadLinear, ...]]
    residual: float


def inf_convolution(conjs: Sequence[ConjugateFn], l: QuadLinear, a_grid: Grid1D) -> InfConvResult:
    """(g1 [] ... [] gm)(l) over decompositions of l on the a-grid.

    The first m-1 coefficients run over the grid and the last closes the sum
    exactly. Decompositions with a +inf summand are pruned; if all are, the
    value is +inf and there is no witness. Ties go to the smallest tuple in
    lexicographic order. ``residual`` is ``|sum(a_i) - l.a|`` of the witness.
    """
    m = len(conjs)
    if m not in (2, 3):
        raise ValueError(f"m must be 2 or 3, got {m}")
    pts = a_grid.points
    c1 = conjs[0].at(pts)
    best, best_idx = PLUS_INF, None
    if m == 2:
        total = c1 + conjs[1].at(l.a - pts)
        total[~np.isfinite(total)] = PLUS_INF
        j = int(np.argmin(total))
        if total[j] < PLUS_INF:
            best, best_idx = float(total[j]), (j,)
    else:
        c2 = conjs[1].at(pts)
        keep2 = np.isfinite(c2)
        for i in np.flatnonzero(np.isfinite(c1)):
            a3 = l.a - (pts[i] + pts)
            row = np.full(len(pts), PLUS_INF)
            row[keep2] = c1[i] + c2[keep2] + conjs[2].at(a3[keep2])
            j = int(np.argmin(row))
            if row[j] < best:
                best, best_idx = float(row[j]), (int(i), j)
    if best_idx is None:
        return InfConvResult(PLUS_INF, None, 0.0)
    head = [float(pts[k]) for k in best_idx]
    witness = tuple(QuadLinear(a) for a in head) + (QuadLinear(l.a - sum(head)),)
    residual = abs(sum(w.a for w in witness) - l.a)
    return InfConvResult(best, witness, residual)


@dataclass(frozen=True, eq=False)
class SupportRegion:
    """supp f as the region b <= b_max(a) = -f*(phi_a) of the (a, b) plane."""

    conj: ConjugateFn

    @property
    def b_max(self) -> np.ndarray:
        return -self.conj.values

    def contains(self, a: float, b: float, tol: float = 0.0) -> bool:
        return bool(b <= -self.conj(a) + tol)


def support_region(f: ExtFunction, a_grid: Grid1D, x_grid: Grid1D) -> SupportRegion:
    return SupportRegion(tabulate_conjugate(f, a_grid, x_grid))


def support_contains(f: ExtFunction, h: QuadAffine, x_grid: Grid1D, tol: float = 1e-9) -> bool:
    """Whether ``h <= f + tol`` at every point of the escape-extended sweep.

    Points where f is +inf impose nothing. An escaping sweep means h
    overtakes f somewhere far out, so the answer is False.
    """

    def excess(xs):
        fx = f.sample(xs)
        return np.where(np.isinf(fx), -np.inf, h.a * np.square(xs) + h.b - fx)

    res = grid_sup(excess, x_grid)
    return (not res.unbounded) and res.value <= tol


def epi_conjugate_contains(f: ExtFunction, l: QuadLinear, r: float, x_grid: Grid1D, tol: float = 1e-9) -> bool:
    """(l, r) in epi f*, decided through membership of l - r in supp f."""
    return support_contains(f, QuadAffine(l.a, -r), x_grid, tol)


class SupportSumCheck(NamedTuple):
    in_supp_sum: bool
    in_closure_of_minkowski: bool


def support_sum_closure_check(
    f: ExtFunction,
    g: ExtFunction,
    probe: QuadAffine,
    a_grid: Grid1D,
    x_grid: Grid1D,
    tol: float = 5e-3,
) -> SupportSumCheck:
    """Compare probe membership in supp(f+g) and in cl(supp f + supp g).

    Both supports are downward closed, so the Minkowski sum reaches (a, b)
    iff some split a = a_f + a_g has b <= b_max_f(a_f) + b_max_g(a_g),
    i.e. b <= -(f* [] g*)(a). The probe's a is snapped to the nearest
    a-grid point, which must be within ``tol``.
    """
    idx = a_grid.lookup([probe.a], atol=tol)[0]
    if idx < 0:
        raise ValueError(f"probe a={probe.a} is farther than tol from the a-grid")
    a_near = float(a_grid.points[idx])
    dist_a = abs(a_near - probe.a)
    in_sum = support_contains(sum_functions([f, g]), probe, x_grid, tol)
    conjs = [tabulate_conjugate(f, a_grid, x_grid), tabulate_conjugate(g, a_grid, x_grid)]
    ic = inf_convolution(conjs, QuadLinear(a_near), a_grid)
    if ic.value == PLUS_INF:
        in_mink = False
    else:
        gap_b = max(0.0, probe.b - (-ic.value))
        in_mink = bool(np.hypot(dist_a, gap_b) <= tol)
    return SupportSumCheck(bool(in_sum), in_mink)
