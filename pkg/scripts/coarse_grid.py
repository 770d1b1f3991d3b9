"""How the verification behaves as the grids get coarser.

Prints, per configuration, the effective gap tolerance and the failing
records. The gap tolerance scales with 2 x_step + a_step max|x|^2; the
one-a-step dilation used by set comparisons scales with a_step.
"""

import time

import click

from abconvex.config import RunConfig, parse_grid
from abconvex.verification import run_verification

CONFIGS = [
    ("-3:3:0.001", "-10:10:0.01"),
    ("-3:3:0.01", "-10:10:0.01"),
    ("-3:3:0.1", "-10:10:0.01"),
    ("-3:3:0.01", "-10:10:0.05"),
    ("-3:3:0.01", "-10:10:0.1"),
]


@click.command()
def main():
    for xg, ag in CONFIGS:
        cfg = RunConfig(parse_grid(xg), parse_grid(ag))
        t0 = time.perf_counter()
        rep = run_verification(cfg)
        s = rep.summary()
        failing = [f"{r.check_id} ({r.max_error:.3g})" for r in rep.records if r.status != "pass"]
        click.echo(
            f"x={xg:12s} a={ag:12s} tol={rep.config['effective_tol']:.4g} "
            f"pass={s['pass']} fail={s['fail']} ind={s['indeterminate']} {time.perf_counter() - t0:5.1f}s"
        )
        for f in failing:
            click.echo(f"    {f}")


if __name__ == "__main__":
    main()
