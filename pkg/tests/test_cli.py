import json
import math

import numpy as np
import pytest

from hamzoo.cli import main
from hamzoo.dynamics import read_trajectory_csv

STD = '{"family":"standard"}'
CAB1 = '{"family":"cabbatonian","j":1,"lambdas":[2.0],"sign":-1}'


def run(args):
    return main(args)


def test_eval_standard(capsys):
    rc = run(["eval", "--spec", STD, "--potential", "0.5*x^2",
              "--m", "1", "--x", "1", "--p", "1"])
    out = capsys.readouterr().out
    assert rc == 0
    values = {line.split()[0]: float(line.split()[1]) for line in out.strip().splitlines()}
    assert values["H"] == 1.0
    assert values["chain_factor"] == 1.0


def test_eval_multiplicative(capsys):
    rc = run(["eval", "--spec", CAB1, "--potential", "0.5*x^2",
              "--m", "1", "--x", "1", "--p", "1"])
    out = capsys.readouterr().out
    assert rc == 0
    h = float(out.strip().splitlines()[0].split()[1])
    assert h == pytest.approx(-3.11520, abs=5e-6)


def test_eval_mass_from_spec_json(capsys):
    rc = run(["eval", "--spec", '{"family":"standard","m":2.0}',
              "--potential", "0", "--x", "0", "--p", "2"])
    out = capsys.readouterr().out
    assert rc == 0
    assert float(out.strip().splitlines()[0].split()[1]) == pytest.approx(1.0)


def test_eval_error_codes(capsys):
    assert run(["eval", "--spec", "{not json", "--potential", "0.5*x^2",
                "--x", "1", "--p", "1"]) == 2
    assert run(["eval", "--spec", '{"family":"wat"}', "--potential", "0.5*x^2",
                "--x", "1", "--p", "1"]) == 2
    assert run(["eval", "--spec", STD, "--potential", "0.5*y^2",
                "--x", "1", "--p", "1"]) == 2
    assert run(["eval", "--spec", '{"family":"cabbatonian","j":1,"lambdas":[0.05]}',
                "--potential", "0.5*x^2", "--x", "2", "--p", "2"]) == 3
    capsys.readouterr()


def test_integrate_closed_orbit_and_roundtrip(tmp_path, capsys):
    out = tmp_path / "sho.csv"
    rc = run(["integrate", "--spec", STD, "--potential", "0.5*x^2",
              "--x0", "1", "--p0", "0", "--t-end", str(2 * math.pi),
              "--method", "rk4", "--step", "1e-3", "--out", str(out)])
    assert rc == 0
    t, x, p, h = read_trajectory_csv(out)
    assert abs(x[-1] - x[0]) < 1e-6 and abs(p[-1] - p[0]) < 1e-6
    first = out.read_text().splitlines()[1]
    assert float(first.split(",")[0]) == t[0]
    capsys.readouterr()


def test_integrate_zero_time_single_row(tmp_path, capsys):
    out = tmp_path / "zero.csv"
    rc = run(["integrate", "--spec", STD, "--potential", "0.5*x^2",
              "--x0", "1", "--p0", "0", "--t-end", "0", "--out", str(out)])
    assert rc == 0
    assert out.read_text().strip().splitlines() == ["t,x,p,H", "0,1,0,0.5"]
    capsys.readouterr()


def test_integrate_svg_deterministic(tmp_path, capsys):
    svg_a = tmp_path / "a.svg"
    svg_b = tmp_path / "b.svg"
    for svg in (svg_a, svg_b):
        rc = run(["integrate", "--spec", STD, "--potential", "0.5*x^2",
                  "--x0", "1", "--p0", "0", "--t-end", "6.0", "--method", "rk4",
                  "--step", "1e-2", "--out", str(tmp_path / "t.csv"),
                  "--svg", str(svg)])
        assert rc == 0
    content = svg_a.read_bytes()
    assert content == svg_b.read_bytes()
    assert b"viewBox=\"0 0 800 600\"" in content
    assert content.count(b"<polyline") == 1
    capsys.readouterr()


def test_integrate_compare_overlays_and_reports(tmp_path, capsys):
    svg = tmp_path / "overlay.svg"
    rc = run(["integrate", "--spec", STD, "--potential", "0.5*x^2",
              "--x0", "1", "--p0", "0", "--t-end", "16", "--method", "rk45",
              "--tol", "1e-10", "--out", str(tmp_path / "std.csv"),
              "--svg", str(svg), "--compare", CAB1])
    out = capsys.readouterr().out
    assert rc == 0
    assert svg.read_bytes().count(b"<polyline") == 2
    assert "rescale factor 0.882496903" in out
    assert "measured 1.13314845" in out


def test_verify_small_config_passes(tmp_path, capsys):
    config = {
        "potential": "0.5*x^2",
        "specs": [{"family": "standard"},
                  {"family": "cabbatonian", "j": 1, "lambdas": [2.0], "sign": -1}],
        "points": 20,
        "legendre_levels": [0, 1],
        "legendre_grid": 3,
        "output_dir": str(tmp_path),
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    rc = run(["verify", "--config", str(cfg_path)])
    out = capsys.readouterr().out
    assert rc == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["all_pass"] is True
    assert report["seed"] == 42
    assert "PASS" in out


def test_verify_guard_trip_exits_one(tmp_path, capsys):
    config = {
        "specs": [{"family": "cabbatonian", "j": 1, "lambdas": [0.05], "sign": 1}],
        "points": 5,
        "legendre_levels": [],
        "output_dir": str(tmp_path),
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    rc = run(["verify", "--config", str(cfg_path), "--out", str(tmp_path / "r.json")])
    capsys.readouterr()
    assert rc == 1
    report = json.loads((tmp_path / "r.json").read_text())
    assert any(rec["error"] and "OverflowRisk" in rec["error"] for rec in report["records"])


def test_verify_missing_config_exits_two(tmp_path, capsys):
    rc = run(["verify", "--config", str(tmp_path / "nope.json")])
    capsys.readouterr()
    assert rc == 2


def test_verify_bad_config_key_exits_two(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"bogus": 1}')
    rc = run(["verify", "--config", str(cfg)])
    capsys.readouterr()
    assert rc == 2


def test_pascal_rows(capsys):
    rc = run(["pascal", "--rows", "5"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.strip().splitlines()[-1] == "1 4 6 4 1"


def test_pascal_single_row(capsys):
    rc = run(["pascal", "--rows", "1"])
    assert rc == 0
    assert capsys.readouterr().out.strip() == "1"


def test_pascal_too_many_rows(capsys):
    rc = run(["pascal", "--rows", "61"])
    capsys.readouterr()
    assert rc == 2


def test_pascal_mask_matches_recursive_construction(tmp_path, capsys):
    out = tmp_path / "mask.pgm"
    rc = run(["pascal", "--rows", "32", "--mask", "--out", str(out)])
    capsys.readouterr()
    assert rc == 0
    data = out.read_bytes()
    assert data.startswith(b"P5\n32 32\n1\n")

    def construct(n):
        if n == 1:
            return [[1]]
        half = construct(n // 2)
        grid = [[0] * n for _ in range(n)]
        for r in range(n // 2):
            for c in range(n // 2):
                grid[r][c] = half[r][c]
                grid[r + n // 2][c] = half[r][c]
                grid[r + n // 2][c + n // 2] = half[r][c]
        return grid

    pixels = data[len(b"P5\n32 32\n1\n"):]
    expected = bytes(0 if construct(32)[r][c] else 1
                     for r in range(32) for c in range(32))
    assert pixels == expected


def test_legendre_grid_csv(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    rc = run(["legendre", "--j", "1", "--lambdas", "2", "--potential", "0.5*x^2",
              "--n", "4", "--out", str(out)])
    capsys.readouterr()
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "x,v,Lj,pj,legendre_residual"
    assert len(lines) == 17
    residuals = [abs(float(line.split(",")[4])) for line in lines[1:]]
    assert max(residuals) <= 1e-8


def test_sweep_writes_grid_and_slope(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc = run(["sweep", "--spec", CAB1, "--potential", "0.5*x^2",
              "--x", "1", "--p", "1", "--grid", "10,20,40,80", "--out", str(out)])
    printed = capsys.readouterr().out
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "lambda,H,chain_factor,limit_error"
    assert len(lines) == 5
    assert "slope" in printed


def test_sweep_rejects_non_cabbatonian(capsys):
    rc = run(["sweep", "--spec", STD, "--potential", "0.5*x^2",
              "--out", "/tmp/never.csv"])
    capsys.readouterr()
    assert rc == 2
