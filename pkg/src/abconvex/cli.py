"""``abconvex`` command line: conjugate, subdiff, gap-check, verify-example.

Exit codes: 0 success, 1 a check failed, 2 bad configuration, 3 bad data.
"""

from __future__ import annotations

import csv
import math
import os
import sys
from typing import Optional

import click
import numpy as np

from .config import ConfigError, RunConfig, parse_grid, parse_ladder
from .core import AbconvexError, EmptyDomain, EmptyIntersection, ExtFunction, Grid1D
from .duality import MEMBER_TOL, certify_gap_ladder, certify_gap_at_point
from .example import BUILTINS, PROBLEMS, closed_conjugate
from .report import csv_text, dumps, jsonable, write_atomic
from .subdiff import subdiff_enumerate
from .transforms import conjugate, tabulate_conjugate

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DATA = 0, 1, 2, 3


class DataError(AbconvexError):
    """Unreadable or inconsistent input data (exit code 3)."""


def range_values(text: str) -> np.ndarray:
    """Inclusive ``lo:hi:step`` values; lo == hi gives a single value."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must be lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}") from exc
    if not step > 0 or hi < lo:
        raise ConfigError(f"bad range {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


def load_function_file(path: str, x_grid: Grid1D) -> ExtFunction:
    """Two-column CSV with a header row (x, value); ``inf`` allowed.

    Each x is mapped to the nearest x-grid point; grid points not listed are +inf.
    """
    values = np.full(len(x_grid), math.inf)
    seen = set()
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or len(header) != 2:
                raise DataError(f"{path}: expected a header row with two columns")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise DataError(f"{path}:{lineno}: expected two columns")
                x, v = float(row[0]), float(row[1])
                if math.isnan(v) or v == -math.inf:
                    raise DataError(f"{path}:{lineno}: value must be real or inf")
                idx = int(x_grid.lookup([x])[0])
                if idx < 0:
                    raise DataError(f"{path}:{lineno}: x={x} lies outside the x-grid")
                if idx in seen:
                    raise DataError(f"{path}:{lineno}: two rows map to grid point {x_grid.points[idx]}")
                seen.add(idx)
                values[idx] = v
    except OSError as exc:
        raise DataError(str(exc)) from exc
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if not seen:
        raise DataError(f"{path}: no data rows")
    name = os.path.splitext(os.path.basename(path))[0]
    return ExtFunction(name, grid=x_grid, values=values)


def resolve_function(name: Optional[str], path: Optional[str], x_grid: Grid1D) -> ExtFunction:
    if (name is None) == (path is None):
        raise ConfigError("give exactly one of --function or --function-file")
    if path is not None:
        return load_function_file(path, x_grid)
    if name not in BUILTINS:
        raise ConfigError(f"unknown function {name!r}; choose from {sorted(BUILTINS)}")
    return BUILTINS[name]


def emit(cfg: RunConfig, text: str) -> None:
    if cfg.output_path:
        write_atomic(cfg.output_path, text)
    else:
        click.echo(text, nl=False)


def _run(fn):
    """Map package errors onto exit codes."""
    try:
        code = fn()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (DataError, EmptyDomain, EmptyIntersection) as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(EXIT_DATA)
    sys.exit(code or EXIT_OK)


def config_options(f):
    f = click.option("--x-grid", default="-3:3:0.001", show_default=True, help="x-grid as lo:hi:step.")(f)
    f = click.option("--a-grid", default="-10:10:0.01", show_default=True, help="a-grid as lo:hi:step.")(f)
    f = click.option("--eps-ladder", default="1,0.3,0.1,0.03,0.01", show_default=True, help="Decreasing eps values.")(f)
    f = click.option("--tol", default=5e-3, show_default=True, type=float, help="Gap tolerance on the default grids.")(f)
    f = click.option("--output", "output", default=None, help="Write here (atomically) instead of stdout.")(f)
    f = click.option("--format", "fmt", default="json", type=click.Choice(["json", "csv"]), show_default=True)(f)
    return f


def build_config(x_grid, a_grid, eps_ladder, tol, output, fmt) -> RunConfig:
    return RunConfig(parse_grid(x_grid), parse_grid(a_grid), parse_ladder(eps_ladder), tol, output, fmt)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Abstract-convexity checks over phi_a(x) = a x^2."""


@main.command("conjugate")
@click.option("--function", "fname", default=None, help=f"Built-in: {', '.join(sorted(BUILTINS))}.")
@click.option("--function-file", default=None, type=click.Path(), help="CSV with header (x, value).")
@click.option("--a", "a_range", required=True, help="Coefficients as lo:hi:step (inclusive).")
@config_options
def conjugate_cmd(fname, function_file, a_range, x_grid, a_grid, eps_ladder, tol, output, fmt):
    """Tabulate f*(phi_a) next to the closed form when there is one."""

    def go():
        cfg = build_config(x_grid, a_grid, eps_ladder, tol, output, fmt)
        f = resolve_function(fname, function_file, cfg.x_grid)
        rows = []
        for a in range_values(a_range):
            oracle = conjugate(f, float(a), cfg.x_grid)
            closed = closed_conjugate(fname, a) if fname in ("f1", "f2", "f3") else None
            if closed is None:
                err = None
            elif math.isinf(oracle) and math.isinf(closed):
                err = 0.0
            else:
                err = abs(oracle - closed)
            rows.append({"a": float(a), "oracle_value": oracle, "closed_form_value": closed, "abs_error": err})
        if cfg.output_format == "csv":
            header = ["a", "oracle_value", "closed_form_value", "abs_error"]
            text = csv_text(header, ([r[h] if r[h] is not None else "" for h in header] for r in rows))
        else:
            text = dumps({"config": cfg.to_dict(), "function": f.name, "rows": rows})
        emit(cfg, text)
        return EXIT_OK

    _run(go)


@main.command("subdiff")
@click.option("--function", "fname", default=None)
@click.option("--function-file", default=None, type=click.Path())
@click.option("--x", "x", required=True, type=float)
@click.option("--eps", "eps", default=0.0, show_default=True, type=float)
@config_options
def subdiff_cmd(fname, function_file, x, eps, x_grid, a_grid, eps_ladder, tol, output, fmt):
    """Grid members of the eps-subdifferential of f at x."""

    def go():
        cfg = build_config(x_grid, a_grid, eps_ladder, tol, output, fmt)
        if eps < 0:
            raise ConfigError("eps must be >= 0")
        f = resolve_function(fname, function_file, cfg.x_grid)
        conj = tabulate_conjugate(f, cfg.a_grid, cfg.x_grid)
        s = subdiff_enumerate(f, x, eps, conj, MEMBER_TOL)
        if cfg.output_format == "csv":
            strict = set(s.strict.tolist())
            text = csv_text(["a", "strict"], ((float(a), int(a in strict)) for a in s.members))
        else:
            text = dumps(
                {
                    "config": cfg.to_dict(),
                    "function": f.name,
                    "x": x,
                    "eps": eps,
                    "members": s.members,
                    "strict_members": s.strict,
                    "emptiness_certified": s.emptiness_certified,
                }
            )
        emit(cfg, text)
        return EXIT_OK

    _run(go)


def gap_report_dict(report) -> dict:
    d = jsonable(report)
    d.update(
        certified=report.certified,
        certified_depth=report.certified_depth,
        min_certified_eps=report.min_certified_eps,
        weak_duality=report.weak_duality,
    )
    return d


@main.command("gap-check")
@click.option("--problem", default=None, help=f"Named problem: {', '.join(sorted(PROBLEMS))}.")
@click.option("--function-file", "files", multiple=True, type=click.Path(), help="Sampled summand (repeat 2-3 times).")
@click.option("--at", "at", default=None, type=float, help="Check optimality at this point.")
@config_options
def gap_check_cmd(problem, files, at, x_grid, a_grid, eps_ladder, tol, output, fmt):
    """Zero-duality-gap certification for a sum of 2 or 3 functions."""

    def go():
        cfg = build_config(x_grid, a_grid, eps_ladder, tol, output, fmt)
        if (problem is None) == (not files):
            raise ConfigError("give exactly one of --problem or --function-file")
        if problem is not None:
            if problem not in PROBLEMS:
                raise ConfigError(f"unknown problem {problem!r}; choose from {sorted(PROBLEMS)}")
            fs = list(PROBLEMS[problem])
        else:
            fs = [load_function_file(p, cfg.x_grid) for p in files]
        if not 2 <= len(fs) <= 3:
            raise ConfigError("a problem needs 2 or 3 functions")
        if at is None:
            report = certify_gap_ladder(fs, None, cfg.eps_ladder, cfg.grids, cfg.tol)
        else:
            report = certify_gap_at_point(fs, None, at, (0.0,) + cfg.eps_ladder, cfg.grids, cfg.tol)
        if cfg.output_format == "csv":
            text = csv_text(
                ["eps", "x_witness", "decomposition", "slack"],
                (
                    (c.eps, c.x_witness, " ".join(format(a, ".9g") for a in c.decomposition), c.slack)
                    for c in report.eps_ladder_certificates
                ),
            )
        else:
            text = dumps({"config": cfg.to_dict(), "functions": [f.name for f in fs], "gap_report": gap_report_dict(report)})
        emit(cfg, text)
        return EXIT_OK if report.certified else EXIT_FAIL

    _run(go)


@main.command("verify-example")
@click.option("--plot-dir", default=None, type=click.Path(), help="Where to write plot-data CSVs (default: next to --output).")
@config_options
def verify_example_cmd(plot_dir, x_grid, a_grid, eps_ladder, tol, output, fmt):
    """Run every check on the three-function example."""
    from .verification import objective_curve_rows, run_verification, support_boundary_rows

    def go():
        cfg = build_config(x_grid, a_grid, eps_ladder, tol, output, fmt)
        rep = run_verification(cfg)
        if cfg.output_format == "csv":
            text = csv_text(
                ["check_id", "anchor", "status", "max_error"],
                ((r.check_id, r.anchor, r.status, float(r.max_error)) for r in rep.records),
            )
        else:
            text = dumps(
                {
                    "config": rep.config,
                    "records": rep.records,
                    "summary": rep.summary(),
                    "gap_report": gap_report_dict(rep.gap_report),
                    "passed": rep.passed,
                }
            )
        emit(cfg, text)
        where = plot_dir or (os.path.dirname(os.path.abspath(cfg.output_path)) if cfg.output_path else None)
        if where:
            write_atomic(
                os.path.join(where, "objective_curve.csv"),
                csv_text(["x", "f1", "f2", "f3", "sum"], objective_curve_rows(cfg)),
            )
            write_atomic(
                os.path.join(where, "support_boundaries.csv"),
                csv_text(
                    ["a", "bmax_f1", "bmax_f2", "bmax_f3", "closed_f1", "closed_f2", "closed_f3"],
                    support_boundary_rows(cfg),
                ),
            )
        s = rep.summary()
        click.echo(f"{s['pass']} pass, {s['fail']} fail, {s['indeterminate']} indeterminate", err=True)
        return EXIT_OK if rep.passed else EXIT_FAIL

    _run(go)


if __name__ == "__main__":
    main()
