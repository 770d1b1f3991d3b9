"""The quadratic families phi_a(x) = a x^2 and psi_{a,b}(x) = a x^2 + b.

phi_a is identified with its coefficient a and psi_{a,b} with the pair
(a, b); sums and scalings act on the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import Grid1D


@dataclass(frozen=True)
class QuadLinear:
    a: float

    def __call__(self, x):
        return lin_eval(self, x)

    def __add__(self, other: "QuadLinear") -> "QuadLinear":
        return lin_add(self, other)

    def __rmul__(self, alpha: float) -> "QuadLinear":
        return QuadLinear(alpha * self.a)

    def __neg__(self) -> "QuadLinear":
        return QuadLinear(-self.a)


ZERO = QuadLinear(0.0)


@dataclass(frozen=True)
class QuadAffine:
    a: float
    b: float

    @property
    def linear(self) -> QuadLinear:
        return QuadLinear(self.a)

    def __call__(self, x):
        return self.a * np.square(x) + self.b

    def __add__(self, other: "QuadAffine") -> "QuadAffine":
        return QuadAffine(self.a + other.a, self.b + other.b)


def lin_eval(l: QuadLinear, x):
    return l.a * np.square(x) if isinstance(x, np.ndarray) else l.a * x * x


def lin_add(l1: QuadLinear, l2: QuadLinear) -> QuadLinear:
    return QuadLinear(l1.a + l2.a)


def param_grid(lo: float = -10.0, hi: float = 10.0, step: float = 0.01) -> Grid1D:
    """An a-grid; the zero function must be on it."""
    g = Grid1D(lo, hi, step)
    if not np.any(g.points == 0.0):
        raise ValueError(f"a-grid {g.spec()} must contain 0")
    return g


def decompositions_of(l: QuadLinear, m: int, grid: Grid1D) -> Iterator[tuple[QuadLinear, ...]]:
    """All m-tuples summing to ``l`` with the first m-1 coefficients on the grid.

    The last coefficient closes the sum by exact subtraction, so it may fall
    off the grid. Restartable: each call yields the same sequence.
    """
    if m not in (2, 3):
        raise ValueError(f"m must be 2 or 3, got {m}")
    pts = grid.points
    if m == 2:
        for a1 in pts:
            yield QuadLinear(float(a1)), QuadLinear(l.a - float(a1))
        return
    for a1 in pts:
        for a2 in pts:
            a1f, a2f = float(a1), float(a2)
            yield QuadLinear(a1f), QuadLinear(a2f), QuadLinear(l.a - (a1f + a2f))
