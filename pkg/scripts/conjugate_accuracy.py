"""Conjugate error against the closed forms for a range of x-steps.

Shows the effect of the local refinement of each sweep row: without it the
error is of order a * x_step^2, with it the error is near round-off.
"""

import click
import numpy as np

from abconvex import core
from abconvex.core import Grid1D
from abconvex.example import EXAMPLE, closed_conjugate
from abconvex.transforms import clear_cache, tabulate_conjugate


def max_error(x_step: float, a_grid: Grid1D) -> float:
    clear_cache()
    x_grid = Grid1D(-3.0, 3.0, x_step)
    worst = 0.0
    for f in EXAMPLE:
        t = tabulate_conjugate(f, a_grid, x_grid)
        closed = np.array([closed_conjugate(f.name, a) for a in a_grid.points])
        fin = np.isfinite(closed) & np.isfinite(t.values)
        worst = max(worst, float(np.max(np.abs(closed[fin] - t.values[fin]))))
    return worst


@click.command()
def main():
    a_grid = Grid1D(-10.0, 10.0, 0.01)
    click.echo("x_step    refined     unrefined")
    for step in (0.1, 0.03, 0.01, 0.003, 0.001):
        refined = max_error(step, a_grid)
        saved = core.REFINE_PASSES
        core.REFINE_PASSES = 0
        try:
            plain = max_error(step, a_grid)
        finally:
            core.REFINE_PASSES = saved
        click.echo(f"{step:<8g}  {refined:.3e}   {plain:.3e}")


if __name__ == "__main__":
    main()
