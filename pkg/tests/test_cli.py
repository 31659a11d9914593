import csv
import math
import shutil
from pathlib import Path

import pytest

from kshift.cli import main
from kshift.harness import read_manifest, sha256_file, verify_manifest

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = """\
x_min = -30
x_max = 30
h = 0.2
profile = tanh
shift_speed = 0.5
chi = 0.2
nu = 1
mu = 1
b = 1
t_end = 3
snapshot_dt = 0.5
"""


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return p


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_simulate_writes_outputs(tmp_path, small_cfg):
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(small_cfg), "--out", str(out)]) == 0
    for name in ("snapshots.csv", "fronts.csv", "report.txt", "manifest.txt", "slices.dat"):
        assert (out / name).exists()
    snaps = rows(out / "snapshots.csv")
    assert list(snaps[0]) == ["t", "x", "u", "v"]
    assert len(snaps) == 7 * 301
    assert {r["t"] for r in snaps} == {repr(0.5 * k) for k in range(7)}
    assert len(rows(out / "fronts.csv")) == 7
    man = read_manifest(out / "manifest.txt")
    assert man["frame"] == "lab" and man["config.shift_speed"] == "0.5"
    assert verify_manifest(out) == []
    assert "classification = " in (out / "report.txt").read_text()


def test_manifest_detects_tampering(tmp_path, small_cfg):
    out = tmp_path / "run"
    main(["simulate", "--config", str(small_cfg), "--out", str(out)])
    with open(out / "fronts.csv", "a") as fh:
        fh.write("junk\n")
    (out / "slices.dat").unlink()
    assert sorted(verify_manifest(out)) == ["fronts.csv: checksum mismatch", "slices.dat: missing"]


def test_reruns_are_bit_identical(tmp_path, small_cfg):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["simulate", "--config", str(small_cfg), "--out", str(a)])
    main(["simulate", "--config", str(small_cfg), "--out", str(b)])
    for name in ("snapshots.csv", "fronts.csv", "slices.dat", "report.txt"):
        assert sha256_file(a / name) == sha256_file(b / name)


def test_frame_override_keeps_lab_coordinates(tmp_path, small_cfg):
    out = tmp_path / "com"
    assert main(["simulate", "--config", str(small_cfg), "--out", str(out), "--frame", "comoving"]) == 0
    assert read_manifest(out / "manifest.txt")["frame"] == "comoving"
    last = [r for r in rows(out / "snapshots.csv") if r["t"] == "3.0"]
    assert float(last[0]["x"]) == pytest.approx(-30 + 0.5 * 3)


def test_constant_config_reports_steady_state(tmp_path, capsys):
    out = tmp_path / "steady"
    cfg = CONFIGS / "constant_steady.cfg"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    report = (out / "report.txt").read_text()
    assert "homogeneous state" in report and "steady" in report
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--strict"]) == 3


def test_extinction_config(tmp_path):
    out = tmp_path / "ext"
    assert main(["simulate", "--config", str(CONFIGS / "case1_c3.cfg"), "--out", str(out),
                 "--strict"]) == 0
    assert "classification = Extinction" in (out / "report.txt").read_text()


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("x_min = -1\nx_max 5\n")
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "bad.cfg:2:" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg"), "--out", "x"]) == 1
    assert main(["simulate"]) == 1


def test_numeric_failure_exit_code(tmp_path, small_cfg, capsys):
    cfg = tmp_path / "stiff.cfg"
    cfg.write_text(SMALL + "dt = 0.5\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "stability limit" in capsys.readouterr().err


def eig_value(capsys, args):
    assert main(["eig", *args]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    return float(first.split("=")[1])


def test_eig_examples(capsys, tmp_path):
    assert eig_value(capsys, ["--r-const", "1", "--c", "0", "--L", "3.14159265"]) == pytest.approx(0.75, abs=1e-4)
    assert eig_value(capsys, ["--to-infinity", "--r-const", "1", "--c", "0"]) == pytest.approx(1.0, abs=1e-4)
    ef = tmp_path / "eigenfunction.csv"
    lam = eig_value(capsys, ["--c", "2", "--r-const", "1", "--L", "3.14159265", "--eigenfunction", str(ef)])
    assert lam == pytest.approx(-0.25, abs=1e-4)
    phi = rows(ef)
    assert len(phi) == 4097 and max(float(r["phi"]) for r in phi) == 1.0
    x = [float(r["x"]) for r in phi]
    assert x[0] == pytest.approx(-3.14159265) and x[-1] == pytest.approx(3.14159265)


def test_eig_bump_and_failures(capsys):
    lam = eig_value(capsys, ["--to-infinity", "--c", "0.5", "--width", "5"])
    assert lam == pytest.approx(0.6697, abs=1e-3)
    assert main(["eig", "--to-infinity", "--r-const", "1", "--tol", "1e-12", "--max-L", "50"]) == 2
    assert main(["eig", "--L", "2", "--profile", "tanh", "--r-minus", "1"]) == 1


def test_verify_suite(capsys):
    assert main(["verify", "kernel"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 2 and "2/2 passed" in out


def sweep_file(tmp_path, body):
    p = tmp_path / "sweep.cfg"
    p.write_text(SMALL + body)
    return p


def test_sweep_summary_and_manifests(tmp_path):
    spec = sweep_file(tmp_path, "sweep.shift_speed = 0.5, 3.0\nsweep.nu = 1, 2\n")
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(spec), "--out", str(out), "--jobs", "2"]) == 0
    summary = rows(out / "summary.csv")
    assert len(summary) == 4
    assert [r["cell"] for r in summary] == [f"cell_{i:04d}" for i in range(4)]
    assert all(r["clause"] for r in summary)
    for i in range(4):
        assert verify_manifest(out / f"cell_{i:04d}") == []


def test_parallel_sweep_matches_serial(tmp_path):
    spec = sweep_file(tmp_path, "sweep.shift_speed = 0.5, 1.0, 3.0\n")
    serial, parallel = tmp_path / "s", tmp_path / "p"
    main(["sweep", "--config", str(spec), "--out", str(serial), "--jobs", "1"])
    main(["sweep", "--config", str(spec), "--out", str(parallel), "--jobs", "3"])
    assert (serial / "summary.csv").read_text() == (parallel / "summary.csv").read_text()
    for i in range(3):
        cell = f"cell_{i:04d}/snapshots.csv"
        assert sha256_file(serial / cell) == sha256_file(parallel / cell)


def test_empty_sweep_equals_simulate(tmp_path, small_cfg):
    main(["simulate", "--config", str(small_cfg), "--out", str(tmp_path / "sim")])
    assert main(["sweep", "--config", str(small_cfg), "--out", str(tmp_path / "sw")]) == 0
    assert len(rows(tmp_path / "sw" / "summary.csv")) == 1
    for name in ("snapshots.csv", "fronts.csv", "report.txt"):
        assert sha256_file(tmp_path / "sim" / name) == sha256_file(tmp_path / "sw" / "cell_0000" / name)


def test_sweep_records_failed_cells(tmp_path):
    spec = sweep_file(tmp_path, "sweep.dt = 0.001, 0.5\n")
    out = tmp_path / "sw"
    assert main(["sweep", "--config", str(spec), "--out", str(out)]) == 2
    summary = rows(out / "summary.csv")
    assert summary[0]["exit_code"] == "0" and summary[0]["verdict"] != "failed"
    assert summary[1]["verdict"] == "failed" and summary[1]["exit_code"] == "2"
    assert "stability limit" in summary[1]["reason"]


def test_sweep_config_errors(tmp_path):
    assert main(["sweep", "--config", str(sweep_file(tmp_path, "sweep.bogus = 1\n")),
                 "--out", str(tmp_path / "o")]) == 1
    assert main(["sweep", "--config", str(sweep_file(tmp_path, "")), "--out", str(tmp_path / "o"),
                 "--jobs", "0"]) == 1


def test_example_sweep_case1(tmp_path):
    out = tmp_path / "c"
    assert main(["sweep", "--config", str(CONFIGS / "sweep_case1_c.cfg"), "--out", str(out)]) == 0
    got = {r["shift_speed"]: (r["predicted"], r["classification"]) for r in rows(out / "summary.csv")}
    assert got == {
        "1.0": ("SpreadAlongShift", "SpreadAlongShift"),
        "1.9": ("SpreadAlongShift", "SpreadAlongShift"),
        "2.1": ("Extinction", "Extinction"),
        "3.0": ("Extinction", "Extinction"),
    }


def test_example_sweep_case2_nu(tmp_path):
    out = tmp_path / "n"
    assert main(["sweep", "--config", str(CONFIGS / "sweep_case2_nu.cfg"), "--out", str(out)]) == 0
    summary = rows(out / "summary.csv")
    for r in summary:
        if float(r["nu"]) >= 5.6:
            assert r["predicted"] == r["classification"] == "Extinction"
        else:
            assert r["predicted"] == "Indeterminate"
