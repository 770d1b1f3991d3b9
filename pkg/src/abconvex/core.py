"""Extended reals, 1-D grids and extended-real-valued functions on R.

Extended reals are plain floats: ``PLUS_INF`` is ``math.inf`` and ``-inf``
is never a legal value. Functions are vectorised callables over numpy
arrays, so every sweep in the package is an array operation.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

PLUS_INF = math.inf

# rise of the sup over the last doubling above which it is declared +inf
ESCAPE_TOL = 1.0
# window k spans [lo * 2**k, hi * 2**k]; 10 doublings reach |x| ~ 3e3 on the default grid
MAX_DOUBLINGS = 10
# entries per (rows x points) block evaluated at once
_BLOCK = 4_000_000
# local refinement: points per side of the maximiser, spanning one grid step
REFINE_POINTS = 20
# zoom passes of the local refinement
REFINE_PASSES = 2


class AbconvexError(Exception):
    """Base class for errors raised by this package."""


class NegativeInfinityError(AbconvexError, ValueError):
    """An operation would have produced -inf, which ExtReal cannot represent."""


class OutOfDomainGrid(AbconvexError, KeyError):
    """A sampled function was queried away from its grid."""


class AllInfinite(AbconvexError, ValueError):
    """Every grid point was excluded from a sup (the function is +inf there)."""


class EmptyDomain(AllInfinite):
    """f is +inf on the whole sweep, so its conjugate is undefined here."""


class EmptyIntersection(AbconvexError, ValueError):
    """The point (or grid) misses the intersection of the domains."""


def worker_count() -> int:
    """Worker cap for parallel sweeps, read from ``ABCONVEX_THREADS``."""
    raw = os.environ.get("ABCONVEX_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def check_ext(value: float) -> float:
    value = float(value)
    if math.isnan(value) or value == -math.inf:
        raise NegativeInfinityError(f"not an extended real: {value!r}")
    return value


def ext_add(x: float, y: float) -> float:
    """Saturating addition on R u {+inf}."""
    x, y = check_ext(x), check_ext(y)
    if x == PLUS_INF or y == PLUS_INF:
        return PLUS_INF
    return x + y


def fmt_ext(value: float) -> float | str:
    """Serialisable form: +inf becomes the literal string ``"inf"``."""
    if value == PLUS_INF:
        return "inf"
    if value == -PLUS_INF:
        return "-inf"
    return value


@dataclass(frozen=True)
class Grid1D:
    """Uniform lattice ``lo, lo+step, ...`` with 0 inserted when it lies inside."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if self.n_lattice < 2:
            raise ValueError("grid must hold at least two points")

    @classmethod
    def parse(cls, text: str) -> "Grid1D":
        """Parse the shared ``lo:hi:step`` range syntax."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be lo:hi:step, got {text!r}")
        lo, hi, step = (float(p) for p in parts)
        return cls(lo, hi, step)

    def spec(self) -> str:
        return f"{self.lo:g}:{self.hi:g}:{self.step:g}"

    @property
    def n_lattice(self) -> int:
        return int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1

    @cached_property
    def points(self) -> np.ndarray:
        pts = np.round(self.lo + self.step * np.arange(self.n_lattice), 12)
        if self.lo < 0 < self.hi and np.min(np.abs(pts)) > 1e-12:
            pts = np.sort(np.append(pts, 0.0))
        pts[np.abs(pts) <= 1e-12] = 0.0
        pts.flags.writeable = False
        return pts

    def __len__(self) -> int:
        return len(self.points)

    def window(self, k: int) -> "Grid1D":
        """The k-times doubled window, with the step doubled alongside."""
        s = 2**k
        return Grid1D(self.lo * s, self.hi * s, self.step * s)

    def lookup(self, values, atol: Optional[float] = None) -> np.ndarray:
        """Index of the nearest grid point, or -1 where none is within ``atol``.

        ``atol`` defaults to half a step (nearest-point semantics).
        """
        atol = self.step / 2 if atol is None else atol
        pts = self.points
        v = np.atleast_1d(np.asarray(values, dtype=float))
        right = np.clip(np.searchsorted(pts, v), 0, len(pts) - 1)
        left = np.clip(right - 1, 0, len(pts) - 1)
        use_left = np.abs(v - pts[left]) <= np.abs(v - pts[right])
        idx = np.where(use_left, left, right)
        ok = np.abs(v - pts[idx]) <= atol + 1e-12
        return np.where(ok, idx, -1)


def x_grid_default() -> Grid1D:
    return Grid1D(-3.0, 3.0, 1e-3)


class ExtFunction:
    """An extended-real-valued function on R.

    Either a closed form (a vectorised callable) or samples on a ``Grid1D``.
    ``sample`` never fails: for sampled functions points away from the grid
    read as +inf, i.e. the domain is the sampled set. ``__call__`` is the
    strict scalar evaluation and raises ``OutOfDomainGrid`` instead.
    """

    def __init__(
        self,
        name: str,
        fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        *,
        grid: Optional[Grid1D] = None,
        values: Optional[Iterable[float]] = None,
    ):
        if (fn is None) == (grid is None):
            raise ValueError("give either a closed form or a grid with values")
        self.name = name
        self._fn = fn
        self.grid = grid
        if grid is not None:
            vals = np.array(list(values), dtype=float)
            if vals.shape != (len(grid),):
                raise ValueError(f"expected {len(grid)} samples, got {vals.shape}")
            if np.any(np.isnan(vals)) or np.any(vals == -np.inf):
                raise NegativeInfinityError("samples must lie in R u {+inf}")
            vals.flags.writeable = False
            self.values = vals

    @property
    def is_sampled(self) -> bool:
        return self.grid is not None

    def __repr__(self) -> str:
        kind = "Sampled" if self.is_sampled else "ClosedForm"
        return f"ExtFunction({self.name!r}, {kind})"

    def sample(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self._fn is not None:
            with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
                out = np.asarray(self._fn(xs), dtype=float)
            return np.broadcast_to(out, xs.shape).copy()
        idx = self.grid.lookup(xs.ravel(), atol=1e-6 * self.grid.step)
        out = np.where(idx >= 0, self.values[np.maximum(idx, 0)], PLUS_INF)
        return out.reshape(xs.shape)

    def __call__(self, x: float) -> float:
        if self.is_sampled and self.grid.lookup([x], atol=1e-6 * self.grid.step)[0] < 0:
            raise OutOfDomainGrid(f"{self.name}: {x} is off the sample grid")
        return check_ext(self.sample(np.array([float(x)]))[0])

    def __add__(self, other: "ExtFunction") -> "ExtFunction":
        return sum_functions([self, other])


_sums: dict = {}


def sum_functions(fs: list[ExtFunction], name: Optional[str] = None) -> ExtFunction:
    """Pointwise sum with saturating +inf.

    The same summands give back the same object, so tables cached per
    function are shared between repeated sums.
    """
    fs = list(fs)
    name = name or "+".join(f.name for f in fs)
    key = (tuple(id(f) for f in fs), name)
    hit = _sums.get(key)
    if hit is not None and all(a is b for a, b in zip(hit[0], fs)):
        return hit[1]

    def total(xs):
        acc = np.zeros(np.shape(xs))
        for f in fs:
            acc = acc + f.sample(xs)
        return acc

    out = ExtFunction(name, total)
    _sums[key] = (fs, out)
    return out


class SupResult(NamedTuple):
    value: float
    argmax: float
    unbounded: bool


def _row_max(rows_fn, pts, rows):
    """Row-wise max and smallest argmax of ``rows_fn(pts, rows)``; -inf entries are excluded."""
    vals = np.asarray(rows_fn(pts, rows), dtype=float)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    j = np.argmax(vals, axis=1)
    best = vals[np.arange(len(rows)), j]
    return best, pts[j]


def _blocked_max(rows_fn, pts, rows):
    per = max(1, _BLOCK // max(1, len(pts)))
    chunks = [rows[i : i + per] for i in range(0, len(rows), per)]
    workers = min(worker_count(), len(chunks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda c: _row_max(rows_fn, pts, c), chunks))
    else:
        parts = [_row_max(rows_fn, pts, c) for c in chunks]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _window_step(grid: Grid1D, x: np.ndarray) -> np.ndarray:
    """Step of the first doubled window that contains each x."""
    reach = np.maximum(np.maximum(x / grid.hi if grid.hi > 0 else 0.0, x / grid.lo if grid.lo < 0 else 0.0), 1.0)
    k = np.ceil(np.log2(reach) - 1e-12)
    return grid.step * 2.0**k


def refine_rows(rows_fn, grid: Grid1D, best, arg, rows, n: int = REFINE_POINTS, local_fn=None, passes: Optional[int] = None):
    """Polish each row's max on local grids of 2n+1 points around its maximiser.

    The first pass spans one window step either side; each further pass
    zooms in to one spacing of the previous pass. ``local_fn(P, rows)``
    evaluates row r at its own points ``P[r]``; without it every row is
    evaluated separately through ``rows_fn``.
    """
    passes = REFINE_PASSES if passes is None else passes
    if n <= 0 or len(rows) == 0:
        return
    offsets = np.linspace(-1.0, 1.0, 2 * n + 1)
    width = _window_step(grid, arg[rows])
    for _ in range(passes):
        P = np.round(arg[rows, None] + width[:, None] * offsets[None, :], 12)
        if local_fn is not None:
            V = np.asarray(local_fn(P, rows), dtype=float)
        else:
            V = np.stack([np.asarray(rows_fn(P[i], rows[i : i + 1]), dtype=float)[0] for i in range(len(rows))])
        V = np.where(np.isnan(V), -np.inf, V)
        j = np.argmax(V, axis=1)
        val = V[np.arange(len(rows)), j]
        up = val > best[rows]
        best[rows[up]] = val[up]
        arg[rows[up]] = P[np.arange(len(rows)), j][up]
        width = width / n


def escape_sweep(rows_fn, n_rows: int, grid: Grid1D, escape: bool = True, refine: int = 0, local_fn=None):
    """Batched sup over ``grid`` with the doubling escape test.

    ``rows_fn(pts, rows)`` returns an array of shape ``(len(rows), len(pts))``;
    -inf marks excluded points. Window k (k >= 1) is ``grid.window(k)``, of
    which only the band outside window k-1 is evaluated. A row is unbounded
    iff the final doubling still raised its sup by more than ``ESCAPE_TOL``.

    With ``refine`` > 0 the finite rows are then polished on a local grid of
    ``2 * refine + 1`` points spanning one step either side of the maximiser.

    Returns ``(values, argmax, unbounded)`` arrays; unbounded rows hold +inf.
    """
    rows = np.arange(n_rows)
    best, arg = _blocked_max(rows_fn, grid.points, rows)
    if np.any(best == -np.inf):
        raise AllInfinite("every grid point is excluded")
    unbounded = np.zeros(n_rows, dtype=bool)
    if escape:
        _escape(rows_fn, grid, rows, best, arg, unbounded)
    refine_rows(rows_fn, grid, best, arg, rows[~unbounded], refine, local_fn)
    return best, arg, unbounded


def _escape(rows_fn, grid, rows, best, arg, unbounded):
    # Every doubling runs: a row can dip before it overtakes, so a zero rise proves nothing.
    rise = np.zeros(len(rows))
    for k in range(1, MAX_DOUBLINGS + 1):
        pts = grid.window(k).points
        inner = grid.window(k - 1) if k > 1 else grid
        pts = pts[(pts < inner.lo) | (pts > inner.hi)]
        if len(pts) == 0:
            continue
        val, x = _blocked_max(rows_fn, pts, rows)
        b, a = best[rows], arg[rows]
        better = (val > b) | ((val == b) & (x < a))
        rise[rows] = np.maximum(val - b, 0.0)
        best[rows] = np.where(better, val, b)
        arg[rows] = np.where(better, x, a)
    out = rows[rise[rows] > ESCAPE_TOL]
    unbounded[out] = True
    best[out] = PLUS_INF


def grid_sup(
    f: Callable[[np.ndarray], np.ndarray], grid: Grid1D, escape: bool = True, refine: int = 0
) -> SupResult:
    """Maximum of ``f`` over the grid (smallest maximiser on ties).

    Points where ``f`` is -inf or nan are ignored. With ``escape`` the
    doubling test of ``escape_sweep`` decides whether the sup is +inf.
    """
    vals, arg, unb = escape_sweep(
        lambda pts, rows: np.asarray(f(pts), dtype=float)[None, :], 1, grid, escape, refine, lambda P, rows: f(P)
    )
    return SupResult(float(vals[0]), float(arg[0]), bool(unb[0]))


@dataclass(frozen=True)
class Grids:
    """The x-grid and the a-grid used together by most computations."""

    x: Grid1D = field(default_factory=x_grid_default)
    a: Grid1D = field(default_factory=lambda: Grid1D(-10.0, 10.0, 0.01))
