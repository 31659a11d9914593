"""Run persistence and the parallel sweep driver behind the CLI.

Every run directory holds ``snapshots.csv`` (long format t, x, u, v with lab
coordinates), ``fronts.csv``, ``slices.dat`` (gnuplot blocks, one per
snapshot), ``report.txt`` and ``manifest.txt``. The manifest lists each output
with its SHA-256 so a directory can be re-verified later.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .analysis import Regime, RegimeReport, classify, predict_regime, track_fronts
from .config import ConfigError, Scenario, SweepSpec
from .environment import ProfileKind, constants
from .evolution import CFLError, NumericalError, Trajectory, run
from .spectral import SpectralConvergenceError, lambda_infinity

logger = logging.getLogger(__name__)

__all__ = [
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_NUMERIC",
    "EXIT_INDETERMINATE",
    "EXIT_MISMATCH",
    "RunOutcome",
    "simulate",
    "sweep",
    "sha256_file",
    "read_manifest",
    "verify_manifest",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_INDETERMINATE = 3
EXIT_MISMATCH = 4

NUMERIC_ERRORS = (NumericalError, CFLError, SpectralConvergenceError, FloatingPointError)
OUTPUT_FILES = ("snapshots.csv", "fronts.csv", "slices.dat", "report.txt")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(x: float) -> str:
    return repr(float(x))


def write_snapshots(traj: Trajectory, path: Path, stride: int = 1) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "u", "v"])
        for k, t in enumerate(traj.times):
            x = traj.lab_x(k)[::stride]
            u = traj.u[k][::stride]
            v = traj.v[k][::stride]
            ts = _fmt(t)
            w.writerows((ts, _fmt(a), _fmt(b), _fmt(c)) for a, b, c in zip(x, u, v))


def write_slices(traj: Trajectory, path: Path, stride: int = 1) -> None:
    """gnuplot data: one indexed block per snapshot, blocks separated by two blank lines."""
    with open(path, "w") as fh:
        for k, t in enumerate(traj.times):
            fh.write(f"# t = {_fmt(t)}\n# x u v\n")
            x = traj.lab_x(k)[::stride]
            for a, b, c in zip(x, traj.u[k][::stride], traj.v[k][::stride]):
                fh.write(f"{_fmt(a)} {_fmt(b)} {_fmt(c)}\n")
            fh.write("\n\n")


def write_fronts(traj: Trajectory, level: float, path: Path) -> None:
    front = track_fronts(traj, level)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "level", "left_front", "right_front", "left_pinned", "right_pinned"])
        for row in zip(front.times, front.left_front, front.right_front,
                       front.left_pinned, front.right_pinned):
            t, lf, rf, lp, rp = row
            w.writerow([_fmt(t), _fmt(level),
                        "" if math.isnan(lf) else _fmt(lf), "" if math.isnan(rf) else _fmt(rf),
                        int(lp), int(rp)])


def _habitat_lines(env) -> list[str]:
    lines = ["# habitat", f"profile = {env.kind.value}"]
    if env.kind is ProfileKind.CONSTANT:
        lines.append(f"r = {env.r_plus:g}")
    else:
        lines.append(f"r_minus = {env.r_minus:g}, r_plus = {env.r_plus:g}, width = {env.width:g}, "
                     f"center = {env.center:g}")
        if env.kind is ProfileKind.BUMP:
            lines.append(f"r_peak = {env.r_peak:g}")
        lines.append("note = concrete profile shape is a modelling choice; "
                     "the regime results only fix its limits and supremum")
    lines.append(f"shift_speed = {env.shift_speed:g}")
    return lines


def _report_text(traj: Trajectory, rep: RegimeReport) -> str:
    s = traj.stats
    lines = ["# regime"]
    lines += rep.summary_lines()
    lines += [""] + _habitat_lines(traj.cfg.env)
    lines += [
        "",
        "# run",
        f"steps = {s.steps}",
        f"sup_u = {s.sup_u:.10g}",
        f"sup_bound = {s.bound:.10g}",
        f"sup_bound_ok = {s.bound_ok}",
        f"clipped_mass_total = {s.clipped_total:.3e}",
        f"clipped_mass_ratio_max = {s.clip_ratio_max:.3e}",
        f"v_solver_gap_max = {s.kernel_gap_max:.3e}",
        f"v_solver_checks = {s.kernel_checks}",
        f"v_gradient_excess_max = {s.psi_excess_max:.3e}",
    ]
    lines += [f"warning = {w}" for w in s.warnings]
    return "\n".join(lines) + "\n"


def write_manifest(out: Path, scenario: Scenario, wall: float, files) -> None:
    sim = scenario.sim
    lines = [
        "# kshift run manifest",
        f"version = {__version__}",
        f"backend = {BACKEND}",
        f"frame = {sim.frame.value}",
        f"grid = {sim.grid.x_min!r} {sim.grid.x_max!r} {sim.grid.n_nodes}",
        f"wall_time_s = {wall:.3f}",
    ]
    lines += [f"config.{k} = {v}" for k, v in scenario.echo]
    for name in files:
        lines.append(f"output.{name} = sha256:{sha256_file(out / name)}")
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def read_manifest(path) -> dict[str, str]:
    entries = {}
    for line in Path(path).read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition(" = ")
        entries[key] = val
    return entries


def verify_manifest(run_dir) -> list[str]:
    """Problems found in ``run_dir``: missing outputs or checksum mismatches."""
    run_dir = Path(run_dir)
    problems = []
    for key, val in read_manifest(run_dir / "manifest.txt").items():
        if not key.startswith("output."):
            continue
        name = key[len("output."):]
        target = run_dir / name
        if not target.exists():
            problems.append(f"{name}: missing")
        elif val != f"sha256:{sha256_file(target)}":
            problems.append(f"{name}: checksum mismatch")
    return problems


@dataclass
class RunOutcome:
    exit_code: int
    classification: str = ""
    predicted: str = ""
    clause: str = ""
    reason: str = ""
    message: str = ""
    wall_time: float = 0.0


def _lambda_for(scenario: Scenario):
    env = scenario.sim.env
    if env.kind is not ProfileKind.BUMP:
        return None
    # the bump verdicts hinge on the sign of lambda_inf; resolve it tighter than the margin
    return lambda_infinity(env.shift_speed, env, tol=0.5 * scenario.lambda_tol).lambda_inf


def simulate(scenario: Scenario, out_dir, strict: bool = False) -> RunOutcome:
    """Run one scenario, write all outputs into ``out_dir`` and classify it."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        with np.errstate(over="raise", invalid="raise"):
            traj = run(scenario.sim)
        lam = _lambda_for(scenario)
    except NUMERIC_ERRORS as exc:
        return RunOutcome(EXIT_NUMERIC, message=f"numeric failure: {exc}")
    consts = constants(scenario.sim.env)
    level = scenario.front_level or 0.01 * consts.r_star / scenario.sim.params.b
    rep = classify(traj, spectral=lam, level=level, persist_halfwidth=scenario.persist_halfwidth,
                   lambda_tol=scenario.lambda_tol)
    wall = time.perf_counter() - t0

    stride = scenario.output_stride
    write_snapshots(traj, out / "snapshots.csv", stride)
    write_slices(traj, out / "slices.dat", stride)
    write_fronts(traj, level, out / "fronts.csv")
    (out / "report.txt").write_text(_report_text(traj, rep))
    write_manifest(out, scenario, wall, OUTPUT_FILES)

    outcome = RunOutcome(
        EXIT_OK,
        classification=rep.classification.value,
        predicted=str(rep.diagnostics["predicted"]),
        clause=str(rep.diagnostics["clause"]),
        reason=str(rep.diagnostics.get("reason", "")),
        wall_time=wall,
    )
    if strict and rep.classification is Regime.INDETERMINATE:
        outcome.exit_code = EXIT_INDETERMINATE
    return outcome


# sweeps ------------------------------------------------------------------------

def _cell_worker(args):
    index, spec, overrides, cell_dir = args
    try:
        scenario = spec.scenario(overrides)
    except ConfigError as exc:
        return index, overrides, RunOutcome(EXIT_CONFIG, message=str(exc))
    pred = predict_regime(scenario.sim, None)
    try:
        outcome = simulate(scenario, cell_dir)
    except Exception as exc:  # a crashing cell must not take the sweep down
        logger.exception("cell %d failed", index)
        outcome = RunOutcome(EXIT_NUMERIC, message=f"{type(exc).__name__}: {exc}")
    if outcome.exit_code != EXIT_OK and not outcome.predicted:
        outcome.predicted, outcome.clause = pred.regime.value, pred.clause
    return index, overrides, outcome


def _verdict(o: RunOutcome) -> str:
    if o.exit_code != EXIT_OK:
        return "failed"
    if o.classification == o.predicted:
        return "match"
    if o.classification == Regime.INDETERMINATE.value and o.reason:
        return "indeterminate"
    if o.predicted == Regime.INDETERMINATE.value:
        return "no_prediction"
    return "mismatch"


def sweep(spec: SweepSpec, out_dir, jobs: int = 1) -> int:
    """Run every cell (``jobs`` worker processes) and write ``summary.csv``.

    Returns 0 when every cell matches its prediction or is Indeterminate with
    a reason, 2 if any cell failed, 4 if a measured regime contradicts the
    prediction.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(i, spec, cell, str(out / f"cell_{i:04d}")) for i, cell in enumerate(spec.cells())]
    if jobs <= 1 or len(tasks) == 1:
        results = [_cell_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks), os.cpu_count() or 1)) as pool:
            results = list(pool.map(_cell_worker, tasks))
    results.sort(key=lambda r: r[0])

    axes = list(spec.axes)
    verdicts = []
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cell", *axes, "predicted", "clause", "classification", "verdict", "exit_code",
                    "reason"])
        for index, overrides, outcome in results:
            verdict = _verdict(outcome)
            verdicts.append(verdict)
            w.writerow([f"cell_{index:04d}", *(overrides[a] for a in axes), outcome.predicted,
                        outcome.clause, outcome.classification, verdict, outcome.exit_code,
                        outcome.reason or outcome.message])
    if "failed" in verdicts:
        return EXIT_NUMERIC
    if "mismatch" in verdicts:
        return EXIT_MISMATCH
    return EXIT_OK
