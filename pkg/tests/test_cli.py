import csv
import filecmp
import json
import os

import pytest

from redqueen import cli
from redqueen import verify as vf

SMALL = """[model]
beta = 1
ell = 0.05

[grid]
m = 32
half_width = 3

[time]
t_end = 0.5
snapshots = 0, 0.25, 0.5

[host]
center = 0, 0
std = 0.5

[pathogen]
center = -0.05, 0
std = 0.5
"""


@pytest.fixture
def small(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL)
    return path


def test_simulate_writes_artifacts(small, tmp_path):
    out = tmp_path / "run"
    assert cli.main(["simulate", "--config", str(small), "--out", str(out)]) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["config"]["model"]["beta"] == 1.0 and m["steps"] > 0
    assert len(m["snapshots"]) == 3
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,H,P,xbar1,xbar2,ybar1,ybar2"
    snap = (out / m["snapshots"][0]["file"]).read_text().splitlines()
    assert snap[0] == "z1,z2,h,p" and len(snap) == 1 + 32 * 32
    assert (out / "plot_trajectory.py").exists() and (out / "resolved.ini").exists()
    assert "timestamp" not in json.dumps(m)


def test_rerun_is_byte_identical(small, tmp_path):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert cli.main(["simulate", "--config", str(small), "--out", str(a)]) == 0
    assert cli.main(["simulate", "--config", str(small), "--out", str(b)]) == 0
    assert cli.main(["simulate", "--config", str(a / "manifest.json"), "--out", str(c)]) == 0
    for other in (b, c):
        cmp = filecmp.dircmp(a, other)
        assert not cmp.diff_files and not cmp.left_only and not cmp.right_only


def test_analyze(small, tmp_path):
    out = tmp_path / "run"
    cli.main(["simulate", "--config", str(small), "--out", str(out)])
    assert cli.main(["analyze", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["report"]["regime"] in ("linear-pulse", "rotating-pulse", "ring-diffusing",
                                       "ring-stationary", "undetermined")
    assert rep["analytic"]["pursuit"]["tau"] == pytest.approx(1.5811388300841898)
    first = (out / "report.json").read_bytes()
    cli.main(["analyze", str(out)])
    assert (out / "report.json").read_bytes() == first


def test_env_output_root(small, tmp_path, monkeypatch):
    monkeypatch.setenv("REDQUEEN_OUT", str(tmp_path / "root"))
    assert cli.main(["simulate", "--config", str(small)]) == 0
    assert (tmp_path / "root" / "runs" / "out" / "manifest.json").exists()


def test_zero_length_run(tmp_path):
    cfg = tmp_path / "z.ini"
    cfg.write_text("[time]\nt_end = 0\n[grid]\nm = 32\n")
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "z")]) == 0
    rows = (tmp_path / "z" / "trajectory.csv").read_text().splitlines()
    assert len(rows) == 2


@pytest.mark.parametrize("argv", [
    ["simulate"], ["simulate", "--config", "/nonexistent.ini"], ["analyze", "/nonexistent"],
    ["frobnicate"], ["verify", "--suite", "nosuch"], ["verify", "--kmax", "2"], ["sweep"],
])
def test_usage_errors(argv):
    assert cli.main(argv) == 2


def test_bad_config_names_the_field(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[model]\nbeta = 1\ngamma_P = many\n")
    assert cli.main(["simulate", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "gamma_P" in err and "bad.ini:3:" in err


def test_numeric_failure_exit_code(tmp_path):
    cfg = tmp_path / "unstable.ini"
    cfg.write_text("[grid]\nm = 32\nhalf_width = 3\n[time]\nt_end = 5\ndt = 2\n")
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "u")]) == 3


def test_verify_suite_and_outputs(tmp_path, capsys):
    assert cli.main(["verify", "--suite", "pursuit", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert (tmp_path / "verify_pursuit.csv").exists()


def test_verify_series_outside_hypothesis_skips(tmp_path, capsys):
    assert cli.main(["verify", "--suite", "series", "--theta-bar", "0.3", "--kmax", "60"]) == 0
    assert "SKIP" in capsys.readouterr().out


def test_verify_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(vf, "run_suite", lambda *a, **k: [vf.Check("always false", False, "forced")])
    assert cli.main(["verify", "--suite", "hermite"]) == 1
    assert "always false" in capsys.readouterr().err


def _sweep(tmp_path, axes, base=SMALL):
    (tmp_path / "base.ini").write_text(base)
    path = tmp_path / "sweep.ini"
    path.write_text("[sweep]\nbase = base.ini\n[axes]\n" + axes)
    return path


def test_sweep_parallel_matches_serial(tmp_path):
    path = _sweep(tmp_path, "model.rho_max = 0.05, 0\nmodel.alpha_H = 0, 0.2\n")
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path / "s1")]) == 0
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path / "s2"), "--jobs", "2"]) == 0
    a = (tmp_path / "s1" / "verdicts.csv").read_bytes()
    assert a == (tmp_path / "s2" / "verdicts.csv").read_bytes()
    rows = list(csv.DictReader(a.decode().splitlines()))
    assert [r["cell"] for r in rows] == ["rho_max=0__alpha_H=0", "rho_max=0__alpha_H=0.2",
                                         "rho_max=0.05__alpha_H=0", "rho_max=0.05__alpha_H=0.2"]
    assert all(r["status"] == "ok" for r in rows)
    assert (tmp_path / "s1" / "plot_phase_diagram.py").exists()


def test_single_cell_sweep_equals_simulate(tmp_path, small):
    path = _sweep(tmp_path, "model.beta = 1\n")
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path / "s")]) == 0
    cli.main(["simulate", "--config", str(small), "--out", str(tmp_path / "r")])
    cell = tmp_path / "s" / "cells" / "beta=1"
    for name in ("trajectory.csv", "manifest.json"):
        assert (cell / name).read_bytes() == (tmp_path / "r" / name).read_bytes()


def test_sweep_all_cells_fail(tmp_path):
    path = _sweep(tmp_path, "time.dt = 2, 3\n", base=SMALL.replace("t_end = 0.5", "t_end = 6"))
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path / "s")]) == 3
    rows = list(csv.DictReader(open(tmp_path / "s" / "verdicts.csv")))
    assert all(r["status"] == "failed" and r["error"] for r in rows)


def test_sweep_partial_failure(tmp_path):
    path = _sweep(tmp_path, "time.dt = 0.01, 3\n", base=SMALL.replace("t_end = 0.5", "t_end = 6"))
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path / "s")]) == 0
    status = [r["status"] for r in csv.DictReader(open(tmp_path / "s" / "verdicts.csv"))]
    assert sorted(status) == ["failed", "ok"]
    assert os.path.isdir(tmp_path / "s" / "cells")
