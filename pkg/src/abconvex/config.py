"""Run configuration shared by the CLI and the verification suite."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import AbconvexError, Grid1D, Grids
from .duality import DEFAULT_TOL
from .subdiff import DEFAULT_EPS_LADDER


class ConfigError(AbconvexError, ValueError):
    """Invalid run configuration (exit code 2)."""


def parse_ladder(text: str) -> tuple[float, ...]:
    """Comma-separated eps values, e.g. ``1,0.3,0.1``."""
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"bad eps ladder {text!r}") from exc


def parse_grid(text: str) -> Grid1D:
    try:
        return Grid1D.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class RunConfig:
    x_grid: Grid1D = field(default_factory=lambda: Grids().x)
    a_grid: Grid1D = field(default_factory=lambda: Grids().a)
    eps_ladder: tuple[float, ...] = DEFAULT_EPS_LADDER
    tol: float = DEFAULT_TOL
    output_path: Optional[str] = None
    output_format: str = "json"

    def __post_init__(self):
        lad = self.eps_ladder
        if not lad:
            raise ConfigError("eps ladder is empty")
        if any(e <= 0 for e in lad):
            raise ConfigError("eps ladder values must be positive")
        if any(b >= a for a, b in zip(lad, lad[1:])):
            raise ConfigError("eps ladder must be strictly decreasing")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.output_format not in ("json", "csv"):
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if not any(self.a_grid.points == 0.0):
            raise ConfigError("the a-grid must contain 0")

    @property
    def grids(self) -> Grids:
        return Grids(self.x_grid, self.a_grid)

    def to_dict(self) -> dict:
        return {
            "x_grid": self.x_grid.spec(),
            "a_grid": self.a_grid.spec(),
            "eps_ladder": list(self.eps_ladder),
            "tol": self.tol,
            "output_format": self.output_format,
        }
