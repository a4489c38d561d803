"""Command-line interface: exit codes, file outputs, determinism, config."""

import json
import os
import subprocess
import sys

import pytest

from biconserve.cli import main

FAST = ["--span", "0:1.5", "--grid", "6x6", "--grid-n", "640"]


def run_cli(args):
    return main(args)


def test_solve_writes_csv_and_figure(tmp_path):
    out = tmp_path / "o"
    assert run_cli(["solve", "--c", "1", "--c2", "4", "--f0", "1",
                    "--out", str(out)] + FAST) == 0
    assert (out / "f_solution.csv").exists()
    assert (out / "f_solution.png").exists()
    header = (out / "f_solution.csv").read_text().splitlines()[0]
    assert header == "s,f,fprime,Q"


def test_solve_rejects_equilibrium_initial_data(tmp_path):
    # f0 exactly at the turning value: constant-curvature case is excluded
    assert run_cli(["solve", "--c", "0", "--c2", "3", "--f0", "1",
                    "--out", str(tmp_path)]) == 2


def test_solve_rejects_bad_c2(tmp_path):
    assert run_cli(["solve", "--c2", "-1", "--out", str(tmp_path)]) == 2


def test_unknown_subcommand_is_usage_error():
    assert run_cli(["bogus"]) == 2


def test_bad_span_and_grid_are_usage_errors(tmp_path):
    assert run_cli(["solve", "--span", "nope", "--out", str(tmp_path)]) == 2
    assert run_cli(["verify", "--grid", "64", "--out", str(tmp_path)]) == 2


def test_build_outputs(tmp_path):
    out = tmp_path / "b"
    assert run_cli(["build", "--c", "1", "--c2", "4", "--f0", "1",
                    "--out", str(out)] + FAST) == 0
    for name in ("profile.csv", "surface_4d.csv", "mesh_123.obj",
                 "mesh_124.obj", "profile.png", "surface.png"):
        assert (out / name).exists(), name
    assert (out / "profile.csv").read_text().splitlines()[0] == \
        "s,x,y,z,T1,T2,T3,kappa,tau"
    assert (out / "surface_4d.csv").read_text().splitlines()[0] == \
        "s,t,x1,x2,x3,x4"
    obj = (out / "mesh_123.obj").read_text().splitlines()
    n_v = sum(1 for ln in obj if ln.startswith("v "))
    n_f = sum(1 for ln in obj if ln.startswith("f "))
    assert n_v == 36 and n_f == 5 * 6


def test_build_minimal_grid(tmp_path):
    out = tmp_path / "m"
    assert run_cli(["build", "--grid", "2x2", "--span", "0:1",
                    "--grid-n", "256", "--out", str(out)]) == 0
    obj = (out / "mesh_123.obj").read_text().splitlines()
    assert sum(1 for ln in obj if ln.startswith("v ")) == 4


def test_verify_report_and_exit(tmp_path):
    out = tmp_path / "v"
    assert run_cli(["verify", "--c", "1", "--c2", "4", "--f0", "1",
                    "--out", str(out)] + FAST) == 0
    report = json.loads((out / "report.json").read_text())
    assert isinstance(report, list)
    names = [row["check"] for row in report]
    assert len(names) == len(set(names))
    for required in ("biconservativity", "normal_parallelism", "codazzi",
                     "ricci", "curvature_law", "gauss_equation",
                     "shape_operator_e3", "shape_operator_e4",
                     "profile_congruence", "conserved_quantity"):
        assert required in names
    for row in report:
        assert set(row) == {"check", "max_residual", "tolerance", "pass",
                            "evaluated", "skipped"}
        assert row["pass"]
    assert (out / "residuals.png").exists()


def test_verify_planar_branch_adds_planarity_checks(tmp_path):
    out = tmp_path / "p"
    assert run_cli(["verify", "--c", "0", "--c2", "4", "--f0", "1",
                    "--out", str(out)] + FAST) == 0
    names = {row["check"]
             for row in json.loads((out / "report.json").read_text())}
    assert "planarity" in names
    assert "torsion_zero" in names


def test_verify_perturbed_fails_biconservativity_only(tmp_path):
    out = tmp_path / "neg"
    code = run_cli(["verify", "--c", "1", "--c2", "4", "--f0", "1",
                    "--perturb", "0.01", "--span", "0:0.8",
                    "--grid", "8x4", "--grid-n", "256", "--out", str(out)])
    assert code == 1
    rows = {row["check"]: row
            for row in json.loads((out / "report.json").read_text())}
    assert not rows["biconservativity"]["pass"]
    assert rows["codazzi"]["pass"]
    assert rows["ricci"]["pass"]
    assert rows["gauss_equation"]["pass"]


def test_verify_deterministic_outputs(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run_cli(["verify", "--out", str(out)] + FAST) == 0
        outs.append(out)
    for fn in ("report.json", "f_solution.csv"):
        assert (outs[0] / fn).read_bytes() == (outs[1] / fn).read_bytes()


def test_thread_pool_matches_serial(tmp_path):
    serial = tmp_path / "s1"
    assert run_cli(["verify", "--out", str(serial)] + FAST) == 0
    threaded = tmp_path / "s2"
    os.environ["BICONSERVE_THREADS"] = "3"
    try:
        assert run_cli(["verify", "--out", str(threaded)] + FAST) == 0
    finally:
        del os.environ["BICONSERVE_THREADS"]
    assert (serial / "report.json").read_bytes() == \
        (threaded / "report.json").read_bytes()


def test_config_file_roundtrip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("c = 1.0\nc2 = 4.0\nf0 = 1.0  # initial curvature\n"
                   "span = 0:1.5\ngrid = 6x6\ngrid_n = 640\n")
    out = tmp_path / "c"
    assert run_cli(["verify", "--config", str(cfg), "--out", str(out)]) == 0
    # flags override the file
    out2 = tmp_path / "c2"
    assert run_cli(["solve", "--config", str(cfg), "--c2", "-3",
                    "--out", str(out2)]) == 2


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("c = 1.0\nwibble = 7\n")
    assert run_cli(["solve", "--config", str(cfg),
                    "--out", str(tmp_path)]) == 2


def test_strict_halves_tolerances(tmp_path):
    out = tmp_path / "st"
    assert run_cli(["verify", "--strict", "--out", str(out)] + FAST) == 0
    rows = json.loads((out / "report.json").read_text())
    by_name = {r["check"]: r for r in rows}
    assert by_name["biconservativity"]["tolerance"] == pytest.approx(5e-7)


def test_sweep_rows_and_error_isolation(tmp_path):
    out = tmp_path / "sw"
    code = run_cli(["sweep", "--c", "0,1", "--c2", "3,4", "--f0", "1",
                    "--out", str(out)] + FAST)
    assert code == 0  # row-level failures must not abort the sweep
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 5
    rows = [dict(zip(lines[0].split(","), ln.split(","))) for ln in lines[1:]]
    statuses = {(r["c"], r["c2"]): r["status"] for r in rows}
    # c2=3, f0=1 hits the equilibrium exclusion for both c values
    assert statuses[("0.0", "3.0")] == "invalid-params"
    assert statuses[("0.0", "4.0")] == "pass"
    assert statuses[("1.0", "4.0")] == "pass"
    ok = next(r for r in rows if r["status"] == "pass")
    assert float(ok["f_turning"]) > 0
    assert float(ok["K_at_s0"]) < 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "biconserve.cli",
                           "solve", "--c2", "-2"], capture_output=True)
    assert proc.returncode == 2
    assert b"c2 must be positive" in proc.stderr
