"""The three-function example and its closed-form conjugates, supports and subdifferentials.

    f1(x) = x^4 - x^2
    f2(x) = 1 - 2|x|
    f3(x) = 1 - 2|x| on [-1/2, 1/2], 0 elsewhere

The sum has global minimisers x = +-1 with value -1. Every closed form here
is independent of the grid machinery, so it serves as the oracle the
numerical routes are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import PLUS_INF, ESCAPE_TOL, ExtFunction, Grids
from .transforms import BICONJ_A_GRIDS, ConjugateFn, biconjugate_values


def _f1(x):
    return x**4 - x**2


def _f2(x):
    return 1.0 - 2.0 * np.abs(x)


def _f3(x):
    return np.where(np.abs(x) <= 0.5, 1.0 - 2.0 * np.abs(x), 0.0)


F1 = ExtFunction("f1", _f1)
F2 = ExtFunction("f2", _f2)
F3 = ExtFunction("f3", _f3)
EXAMPLE = (F1, F2, F3)


def chi(a: float) -> float:
    """max over |x| <= 1/2 of a x^2 + 2|x|, minus 1 (defined for a <= 0)."""
    if a > 0:
        raise ValueError("chi is only used for a <= 0")
    return -1.0 - 1.0 / a if a < -2 else a / 4.0


def closed_conjugate(which: str, a: float) -> float:
    a = float(a)
    if which == "f1":
        return (a + 1) ** 2 / 4 if a >= -1 else 0.0
    if which == "f2":
        return PLUS_INF if a >= 0 else -1.0 - 1.0 / a
    if which == "f3":
        if a > 0:
            return PLUS_INF
        return a / 4 if a >= -2 else -1.0 - 1.0 / a
    raise KeyError(which)


def closed_conjugate_fn(which: str) -> ConjugateFn:
    return ConjugateFn(which, closed=lambda a: closed_conjugate(which, a))


def closed_support_contains(which: str, a: float, b: float) -> bool:
    if which == "f1":
        return (a + 1) ** 2 / 4 + b <= 0 or (a <= -1 and b <= 0)
    if which == "f2":
        return a < 0 and b <= 1 / a + 1
    if which == "f3":
        return (a <= -2 and b <= 1 / a + 1) or (-2 < a <= 0 and b <= -a / 4)
    raise KeyError(which)


@dataclass(frozen=True)
class SubdiffDescriptor:
    """A set of coefficients a: empty, {lo}, [lo, hi] or the ray a <= hi."""

    kind: str
    lo: float = -math.inf
    hi: float = math.inf

    @classmethod
    def empty(cls):
        return cls("empty", math.inf, -math.inf)

    @classmethod
    def singleton(cls, a):
        return cls("singleton", a, a)

    @classmethod
    def interval(cls, lo, hi):
        return cls("interval", lo, hi)

    @classmethod
    def ray(cls, hi):
        return cls("ray", -math.inf, hi)

    def contains(self, a: float, atol: float = 0.0) -> bool:
        return self.lo - atol <= a <= self.hi + atol

    def distance(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if self.kind == "empty":
            return np.full(a.shape, np.inf)
        return np.maximum(0.0, np.maximum(self.lo - a, a - self.hi))

    def clip(self, lo: float, hi: float) -> "SubdiffDescriptor":
        """Intersection with the window [lo, hi]."""
        new_lo, new_hi = max(self.lo, lo), min(self.hi, hi)
        if new_lo > new_hi:
            return SubdiffDescriptor.empty()
        return SubdiffDescriptor(self.kind, new_lo, new_hi)


def closed_subdiff(which: str, x: float) -> SubdiffDescriptor:
    ax = abs(x)
    if which == "f1":
        return SubdiffDescriptor.ray(-1.0) if x == 0 else SubdiffDescriptor.singleton(2 * x * x - 1)
    if which == "f2":
        return SubdiffDescriptor.empty() if x == 0 else SubdiffDescriptor.singleton(-1.0 / ax)
    if which == "f3":
        if x == 0:
            return SubdiffDescriptor.empty()
        if ax < 0.5:
            return SubdiffDescriptor.singleton(-1.0 / ax)
        if ax == 0.5:
            return SubdiffDescriptor.interval(-2.0, 0.0)
        return SubdiffDescriptor.singleton(0.0)
    raise KeyError(which)


# functions used by checks and the CLI beyond the triple

COS = ExtFunction("cos", np.cos)
ZERO_FN = ExtFunction("zero", lambda x: np.zeros_like(x))
ABS = ExtFunction("abs", np.abs)
INDICATOR_ZERO = ExtFunction("indicator0", lambda x: np.where(x == 0, 0.0, np.inf))


def phi_function(a: float) -> ExtFunction:
    return ExtFunction(f"phi_{a:g}", lambda x: a * np.square(x))


BUILTINS = {f.name: f for f in (F1, F2, F3, COS, ZERO_FN, ABS, INDICATOR_ZERO)}
PROBLEMS = {
    "example": (F1, F2, F3),
    "f2f3": (F2, F3),
    "f1zero": (F1, ZERO_FN),
}


class LClass(Enum):
    MEMBER_OF_L = "MemberOfL"
    INDICATOR_OF_ZERO = "IndicatorOfZero"
    NOT_L_CONVEX = "NotLConvex"


@dataclass(frozen=True)
class LClassification:
    kind: LClass
    a: Optional[float] = None


def classify_L_convex(f: ExtFunction, grids: Grids = Grids(), tol: float = 1e-9) -> LClassification:
    """Sort f into: some phi_a, the indicator of {0}, or neither."""
    xs = grids.x.points
    vals = f.sample(xs)
    at0 = vals[xs == 0.0]
    if len(at0) == 0 or at0[0] != 0.0:
        return LClassification(LClass.NOT_L_CONVEX)
    rest = vals[xs != 0.0]
    if np.all(np.isinf(rest)):
        return LClassification(LClass.INDICATOR_OF_ZERO)
    if np.all(np.isfinite(rest)):
        ratio = rest / np.square(xs[xs != 0.0])
        if np.ptp(ratio) <= tol * max(1.0, np.max(np.abs(ratio))):
            return LClassification(LClass.MEMBER_OF_L, float(np.median(ratio)))
    return LClassification(LClass.NOT_L_CONVEX)


class HRegionVerdict(Enum):
    H_CONVEX_CERTIFIED = "HConvexCertified"
    FAILS_FINITE_SUP = "FailsFiniteSup"
    FAILS_DOWNWARD_CLOSED = "FailsDownwardClosed"
    FAILS_CONVEX = "FailsConvex"


def _upper_hull(pts: np.ndarray) -> np.ndarray:
    """Upper concave hull of (a, b) points, sorted by a."""
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    hull: list = []
    for p in pts[order]:
        while hull and hull[-1][0] == p[0]:
            hull.pop()
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append((p[0], p[1]))
    return np.array(hull)


@dataclass(frozen=True)
class FiniteRegion:
    """A region of the (a, b) plane generated by finitely many points.

    ``convex_hull`` takes the convex hull first; ``downward_closed`` then
    subtracts the nonnegative quadrant. With neither flag the region is the
    point set itself.
    """

    pts: np.ndarray
    convex_hull: bool = True
    downward_closed: bool = True

    def contains(self, a: float, b: float, tol: float = 1e-9) -> bool:
        P = self.pts
        if not self.convex_hull:
            if self.downward_closed:
                return bool(np.any((a <= P[:, 0] + tol) & (b <= P[:, 1] + tol)))
            return bool(np.any(np.hypot(P[:, 0] - a, P[:, 1] - b) <= tol))
        hull = _upper_hull(P)
        if self.downward_closed:
            if a > hull[-1, 0] + tol:
                return False
            # best b reachable at any a' >= a on the concave upper hull
            grid = np.append(hull[:, 0], max(a, hull[0, 0]))
            grid = grid[grid >= min(a, hull[-1, 0]) - tol]
            top = np.interp(grid, hull[:, 0], hull[:, 1])
            return bool(b <= np.max(top) + tol)
        if a < hull[0, 0] - tol or a > hull[-1, 0] + tol:
            return False
        lower = _upper_hull(np.column_stack([P[:, 0], -P[:, 1]]))
        top = np.interp(a, hull[:, 0], hull[:, 1])
        bottom = -np.interp(a, lower[:, 0], lower[:, 1])
        return bool(bottom - tol <= b <= top + tol)


def check_H_convex_region(
    region: FiniteRegion,
    b_cap: float = 10.0,
    grids: Grids = Grids(),
    tol: float = 1e-9,
) -> HRegionVerdict:
    """Test the sufficient conditions for a parameter region to be H-convex.

    Checks, in order: midpoint convexity over pairs of generators, downward
    closedness (probing p - (1, 1) for each generator), and a finite upper
    envelope. The last one is an escape test in b: the sup of a x^2 + b over
    generators with b <= b_cap is compared with the sup over b <= 2 b_cap;
    the envelope counts as finite when some grid x shows an increase of at
    most ESCAPE_TOL. Passing all three certifies H-convexity; a failure only
    says the sufficient test did not go through.
    """
    P = np.asarray(region.pts, dtype=float)
    for i in range(len(P)):
        for j in range(i + 1, len(P)):
            mid = (P[i] + P[j]) / 2
            if not region.contains(mid[0], mid[1], tol):
                return HRegionVerdict.FAILS_CONVEX
    for p in P:
        if not region.contains(p[0] - 1.0, p[1] - 1.0, tol):
            return HRegionVerdict.FAILS_DOWNWARD_CLOSED
    x2 = np.square(grids.x.points)
    low = P[P[:, 1] <= b_cap]
    high = P[P[:, 1] <= 2 * b_cap]
    if len(low) == 0:
        return HRegionVerdict.FAILS_FINITE_SUP
    sup_low = np.max(low[:, 0][:, None] * x2[None, :] + low[:, 1][:, None], axis=0)
    sup_high = np.max(high[:, 0][:, None] * x2[None, :] + high[:, 1][:, None], axis=0)
    if not np.any(sup_high - sup_low <= ESCAPE_TOL):
        return HRegionVerdict.FAILS_FINITE_SUP
    return HRegionVerdict.H_CONVEX_CERTIFIED


def is_H_convex(f: ExtFunction, x_grid=None, a_grids=BICONJ_A_GRIDS, tol: float = 5e-3) -> bool:
    """f** == f within tol on the finite part of the x-grid."""
    x_grid = x_grid or Grids().x
    xs = x_grid.points
    fx = f.sample(xs)
    fin = np.isfinite(fx)
    fss = biconjugate_values(f, xs[fin], a_grids, x_grid)
    return bool(np.max(np.abs(fss - fx[fin])) <= tol)
