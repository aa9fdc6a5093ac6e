import json
import subprocess
import sys

import numpy as np
import pytest

from exdep.cli import main


def run_cli(args):
    return main(args)


def test_unknown_subcommand_exits_2():
    proc = subprocess.run([sys.executable, "-m", "exdep.cli", "frobnicate"],
                          capture_output=True)
    assert proc.returncode == 2


def test_missing_required_flag_exits_2():
    proc = subprocess.run([sys.executable, "-m", "exdep.cli", "matern-eta"],
                          capture_output=True)
    assert proc.returncode == 2


def test_eta_subcommand_matches_closed_form(tmp_path, capsys):
    matrix = tmp_path / "m.csv"
    matrix.write_text("1.0,0.3\n0.5,1.0\n")
    out = tmp_path / "summary.json"
    assert run_cli(["eta", "--matrix", str(matrix), "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["regime"] == "AsymptoticIndependence"
    assert obj["eta"] == pytest.approx((1 - 0.15) / (2 - 0.8), abs=1e-12)
    assert obj["chi"] is None
    # schema validation runs on write; invalid structure would have raised


def test_eta_subcommand_boundary(tmp_path):
    matrix = tmp_path / "m.csv"
    matrix.write_text("1.0,1.0,0.0\n1.0,0.0,1.0\n")
    out = tmp_path / "summary.json"
    assert run_cli(["eta", "--matrix", str(matrix), "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["regime"] == "Boundary"
    assert obj["eta"] == 1.0


def test_chi_vs_a22_csv(tmp_path):
    out = tmp_path / "chi.csv"
    params = tmp_path / "params.json"
    params.write_text(json.dumps([
        {"lambda": -0.5, "tau": 1.0, "psi": 1.0},
        {"lambda": 1.0, "tau": 1.0, "psi": 1.0},
    ]))
    code = run_cli(["chi-vs-a22", "--out", str(out), "--params", str(params),
                    "--a22-grid", "0.5,0.7,0.9"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "lambda,tau,psi,a22,chi"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 2 * 4  # grid of three plus one limit row per set
    # limit rows: lambda >= 0 should give exactly zero
    limits = {float(r[0]): float(r[4]) for r in rows if float(r[3]) == 1.0}
    assert limits[1.0] == 0.0
    assert limits[-0.5] > 0.0


def test_ou_convergence_csv_and_gap(tmp_path, capsys):
    out = tmp_path / "ou.csv"
    code = run_cli(["ou-convergence", "--out", str(out),
                    "--deltas", "0.4,0.2", "--h-grid", "0.4,0.8,1.2"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "delta,h,eta_n,eta_limit"
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert np.all(data[:, 2] >= data[:, 3] - 1e-12)


def test_counterexample_decreasing_with_n(tmp_path):
    out = tmp_path / "counter.csv"
    code = run_cli(["counterexample", "--out", str(out), "--seed", "3",
                    "--samples", "200000", "--n-values", "1,10,100"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n,q,chi_hat,se"
    chi = [float(line.split(",")[2]) for line in lines[1:]]
    assert chi[0] > chi[-1]  # decays toward the noise-only level


def test_matern_eta_small_run_byte_reproducible(tmp_path):
    args = ["matern-eta", "--seed", "11", "--alphas", "3",
            "--mesh-nodes", "10", "--n-sites", "4", "--extension", "1"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == "alpha,method,h,eta,eta_thm1,eta_conjecture"
    methods = {line.split(",")[1] for line in lines[1:]}
    assert methods == {"integral", "fem"}


def test_simulate_and_chi_header_only_when_empty(tmp_path):
    out = tmp_path / "sim.csv"
    code = run_cli(["simulate-and-chi", "--seed", "5", "--out", str(out),
                    "--samples", "0", "--mesh-nodes", "5", "--n-sites", "3",
                    "--extension", "1"])
    assert code == 0
    assert out.read_text().splitlines() == ["mesh_side,pair_id,h,q,chi_hat,se"]


def test_simulate_and_chi_small_run(tmp_path):
    out = tmp_path / "sim.csv"
    code = run_cli(["simulate-and-chi", "--seed", "5", "--out", str(out),
                    "--samples", "20000", "--mesh-nodes", "6", "--n-sites", "4",
                    "--extension", "1", "--q", "0.9,0.95"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "mesh_side,pair_id,h,q,chi_hat,se"
    assert len(lines) == 1 + 6 * 2  # six pairs, two levels


def test_numerical_error_exits_1(tmp_path):
    matrix = tmp_path / "m.csv"
    matrix.write_text("1.0,-0.3\n0.5,1.0\n")  # negative coefficient
    assert run_cli(["eta", "--matrix", str(matrix), "--out", str(tmp_path / "o.json")]) == 1
