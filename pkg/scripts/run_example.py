"""Run every check on the three-function example and write report + plot data.

    python3 scripts/run_example.py --out results/
"""

import os

import click

from abconvex.config import RunConfig
from abconvex.report import csv_text, dumps, write_atomic
from abconvex.cli import gap_report_dict
from abconvex.verification import objective_curve_rows, run_verification, support_boundary_rows


@click.command()
@click.option("--out", default="results", show_default=True, type=click.Path())
def main(out):
    cfg = RunConfig()
    rep = run_verification(cfg)
    payload = {"config": rep.config, "records": rep.records, "summary": rep.summary(), "gap_report": gap_report_dict(rep.gap_report), "passed": rep.passed}
    write_atomic(os.path.join(out, "report.json"), dumps(payload))
    write_atomic(os.path.join(out, "objective_curve.csv"), csv_text(["x", "f1", "f2", "f3", "sum"], objective_curve_rows(cfg)))
    write_atomic(
        os.path.join(out, "support_boundaries.csv"),
        csv_text(["a", "bmax_f1", "bmax_f2", "bmax_f3", "closed_f1", "closed_f2", "closed_f3"], support_boundary_rows(cfg)),
    )
    for r in rep.records:
        click.echo(f"{r.status:13s} {r.check_id:38s} {r.max_error:.3g}")
    click.echo(rep.summary())


if __name__ == "__main__":
    main()
