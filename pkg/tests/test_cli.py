import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from thresholdgame.cli import ConfigError, main, parse_grid, parse_regime
from thresholdgame.advisor import Naive, Pooled, Separating


def _rows(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_parse_grid_forms():
    assert np.allclose(parse_grid("1,2,3", "x"), [1, 2, 3])
    assert np.allclose(parse_grid("lin:0:1:3", "x"), [0, 0.5, 1])
    assert np.allclose(parse_grid("log:1:100:3", "x"), [1, 10, 100])
    assert len(parse_grid("mixed", "x")) == 79
    assert len(parse_grid("", "x")) == 0
    with pytest.raises(ConfigError):
        parse_grid("3,2", "x")
    with pytest.raises(ConfigError):
        parse_grid("a,b", "x")


def test_parse_regime():
    assert parse_regime("naive") == Naive()
    assert parse_regime("separating") == Separating()
    assert parse_regime("pooled:0.1,0.5") == Pooled(0.1, 0.5)
    for bad in ("pooled:0.5,0.1", "pooled:x", "clever"):
        with pytest.raises(ConfigError):
            parse_regime(bad)


def test_partition_csv(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["partition", "--gamma-grid", "2", "--lambda-grid", "mixed", "--out", str(out)]) == 0
    text = out.read_text().splitlines()
    assert text[0].startswith("# thresholdgame partition")
    assert text[1] == "lambda,V,gamma,alpha,u_sep,u_pool,phi,class"
    rows = _rows(out)
    signs = np.sign([float(r["phi"]) for r in rows])
    flips = np.nonzero(np.diff(signs))[0]
    assert len(flips) == 1
    lo, hi = float(rows[flips[0]]["lambda"]), float(rows[flips[0] + 1]["lambda"])
    assert lo <= 0.8810 <= hi


def test_partition_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["partition", "--gamma-grid", "1.5,2,3", "--lambda-grid", "mixed"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_policy_zero_value(tmp_path):
    out = tmp_path / "pol.csv"
    assert main(["policy", "--V", "0", "--T-grid", "0.01,0.1,1", "--out", str(out)]) == 0
    rows = _rows(out)
    assert [float(r["theta_star"]) for r in rows] == [0.0, 0.0, 0.0]
    assert "# class=" in out.read_text()


def test_policy_with_monte_carlo(tmp_path):
    out = tmp_path / "pol.json"
    args = ["policy", "--T-grid", "log:1e-3:3:8", "--draws", "20000", "--seed", "5", "--format", "json"]
    assert main(args + ["--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["columns"] == ["T", "theta_star", "value"]
    assert "mc_mean" in doc["summary"] and doc["summary"]["monotone"]


def test_boundary_axis_V(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["boundary", "--axis", "V", "--V-grid", "0.5,1,2", "--out", str(out)]) == 0
    rows = _rows(out)
    assert [r["status"] for r in rows] == ["ok"] * 3
    assert float(rows[1]["lambda_star"]) == pytest.approx(0.881, abs=1e-3)


def test_boundary_no_crossing_marker(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["boundary", "--alpha", "1", "--V-grid", "1", "--out", str(out)]) == 0
    (row,) = _rows(out)
    assert row["status"] == "no-crossing" and row["lambda_star"] == "nan"


def test_effort_table(capsys):
    assert main(["effort", "--theta-grid", "0.5", "--T", "0.2"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1] == "theta_star,e_pass,e_fail"
    th, ep, ef = map(float, out[2].split(","))
    assert (th, round(ep, 3), round(ef, 3)) == (0.5, 0.298, 0.12)


def test_surface_and_asymptotics(capsys):
    assert main(["objective-surface", "--T-grid", "0.2", "--theta-grid", "0.5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1] == "T,theta_star,U"
    assert float(out[2].split(",")[2]) == pytest.approx(0.276746, abs=1e-6)
    assert main(["asymptotics"]) == 0
    assert "pool_exponent" in capsys.readouterr().out


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"V": 0.0, "theta_grid": "0.5", "T": 0.2}))
    assert main(["effort", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.splitlines()[2] == "0.5,0,0"
    assert main(["effort", "--config", str(cfg), "--V", "1"]) == 0
    assert capsys.readouterr().out.splitlines()[2].startswith("0.5,0.297745")


@pytest.mark.parametrize(
    "args",
    [
        ["partition", "--gamma", "0.5"],
        ["partition", "--lambda-grid", "1,0.5"],
        ["effort", "--theta-grid", "0,2"],
        ["policy", "--regime", "weird"],
        ["policy", "--posting-cost", "cubic:1"],
        ["nonsense"],
        ["effort", "--config", "/nonexistent/file.json"],
    ],
)
def test_config_errors(args, capsys):
    assert main(args) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "config"


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert main(["effort", "--config", str(cfg)]) == 2


def test_numerical_failure_exit_code(monkeypatch, capsys):
    from thresholdgame import cli
    from thresholdgame.numerics import ConvergenceError

    def boom(cfg):
        raise ConvergenceError("synthetic")

    monkeypatch.setitem(cli.HANDLERS, "voi", boom)
    assert main(["voi"]) == 3
    assert json.loads(capsys.readouterr().err)["error"] == "numerical"


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "thresholdgame", "asymptotics", "--format", "json"],
        capture_output=True,
        text=True,
        check=True,
    )
    assert json.loads(res.stdout)["command"] == "asymptotics"
