import json

import pytest
from click.testing import CliRunner

from abconvex.cli import main, range_values
from abconvex.config import ConfigError

FAST = ["--x-grid", "-3:3:0.01", "--a-grid", "-10:10:0.05"]


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, list(args), catch_exceptions=False)

    return invoke


def test_range_values():
    assert range_values("-1:1:0.5").tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert range_values("2:2:1").tolist() == [2.0]
    for bad in ("1:0:1", "0:1:0", "0:1", "a:b:c"):
        with pytest.raises(ConfigError):
            range_values(bad)


def test_conjugate_csv(run):
    r = run("conjugate", "--function", "f2", "--a", "-1:0:0.5", "--format", "csv")
    assert r.exit_code == 0
    lines = r.output.splitlines()
    assert lines[0] == "a,oracle_value,closed_form_value,abs_error"
    assert lines[1].startswith("-1.0,0.0,0.0,")
    assert lines[-1] == "0.0,inf,inf,0.0"


def test_conjugate_without_closed_form(run):
    out = json.loads(run("conjugate", "--function", "cos", "--a", "-1:-1:1").output)
    assert out["rows"][0]["oracle_value"] == -1.0 and out["rows"][0]["closed_form_value"] is None


def test_config_errors_exit_2(run):
    assert run("conjugate", "--function", "nope", "--a", "0:1:1").exit_code == 2
    assert run("conjugate", "--a", "0:1:1").exit_code == 2
    assert run("subdiff", "--function", "f1", "--x", "0", "--eps", "-1").exit_code == 2
    assert run("gap-check", "--problem", "example", "--eps-ladder", "0.1,1").exit_code == 2
    assert run("gap-check", "--problem", "example", "--a-grid", "1:2:0.5").exit_code == 2
    assert run("verify-example", "--format", "xml").exit_code == 2


def test_data_errors_exit_3(run, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,value\n0,1\n9,2\n")
    assert run("subdiff", "--function-file", str(bad), "--x", "0").exit_code == 3
    bad.write_text("x,value\n0,abc\n")
    assert run("subdiff", "--function-file", str(bad), "--x", "0").exit_code == 3
    assert run("subdiff", "--function-file", str(tmp_path / "missing.csv"), "--x", "0").exit_code == 3
    allinf = tmp_path / "inf.csv"
    allinf.write_text("x,value\n0,inf\n")
    assert run("conjugate", "--function-file", str(allinf), "--a", "0:0:1").exit_code == 3


def test_subdiff_json_and_file_input(run, tmp_path):
    out = json.loads(run("subdiff", "--function", "f2", "--x", "0", *FAST).output)
    assert out["members"] == [] and out["emptiness_certified"] is True
    f = tmp_path / "bowl.csv"
    f.write_text("x,value\n" + "".join(f"{x / 10},{(x / 10) ** 2}\n" for x in range(-30, 31)))
    out = json.loads(run("subdiff", "--function-file", str(f), "--x", "1", "--x-grid", "-3:3:0.1").output)
    assert 1.0 in out["strict_members"]


def test_gap_check_exit_codes(run, tmp_path):
    r = run("gap-check", "--problem", "example", *FAST)
    assert r.exit_code == 0 and json.loads(r.output)["gap_report"]["certified"] is True
    r = run("gap-check", "--problem", "f2f3", *FAST)
    assert r.exit_code == 1 and json.loads(r.output)["gap_report"]["reason"] == "unbounded"
    assert run("gap-check", "--problem", "example", "--at", "1", *FAST).exit_code == 0
    assert run("gap-check", "--problem", "example", "--at", "0", *FAST).exit_code == 1
    out = tmp_path / "gap.csv"
    assert run("gap-check", "--problem", "example", "--format", "csv", "--output", str(out), *FAST).exit_code == 0
    assert out.read_text().startswith("eps,x_witness,decomposition,slack\n1.0,")


def test_verify_example_coarse(run, tmp_path):
    out = tmp_path / "report.json"
    r = run("verify-example", "--x-grid", "-3:3:0.01", "--a-grid", "-10:10:0.05", "--output", str(out))
    rep = json.loads(out.read_text())
    assert (r.exit_code == 0) == rep["passed"]
    assert {"objective_curve.csv", "support_boundaries.csv", "report.json"} <= set(p.name for p in tmp_path.iterdir())
    assert rep["config"]["x_grid"] == "-3:3:0.01"
