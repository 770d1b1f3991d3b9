import pytest

from abconvex.config import RunConfig, parse_grid
from abconvex.verification import objective_curve_rows, run_verification, support_boundary_rows


@pytest.fixture(scope="module")
def coarse_report():
    return run_verification(RunConfig(parse_grid("-3:3:0.1"), parse_grid("-10:10:0.01")))


def test_coarse_x_grid_passes_with_scaled_tol(coarse_report):
    failing = [r.check_id for r in coarse_report.records if r.status != "pass"]
    assert failing == []
    assert coarse_report.config["effective_tol"] == pytest.approx(5e-3 * 0.29 / 0.092)


def test_records_are_unique_and_sorted(coarse_report):
    ids = [r.check_id for r in coarse_report.records]
    assert ids == sorted(ids) and len(set(ids)) == len(ids)
    assert len(ids) >= 60
    assert all(r.anchor for r in coarse_report.records)


def test_single_rung_ladder_is_indeterminate():
    rep = run_verification(RunConfig(parse_grid("-3:3:0.1"), parse_grid("-10:10:0.01"), eps_ladder=(1.0,)))
    status = {r.check_id: r.status for r in rep.records}
    assert status["zero_gap_ladder"] == "indeterminate"
    assert not rep.passed
    assert rep.summary()["fail"] == 0


def test_plot_rows():
    cfg = RunConfig(parse_grid("-3:3:0.1"), parse_grid("-10:10:0.01"))
    rows = list(objective_curve_rows(cfg, every=1))
    assert len(rows) == 61
    best = min(rows, key=lambda r: r[4])
    assert best[4] == pytest.approx(-1.0) and abs(best[0]) == pytest.approx(1.0)
    srows = list(support_boundary_rows(cfg))
    assert all(len(r) == 7 for r in srows)
