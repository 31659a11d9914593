"""Command line entry point: ``kshift {simulate, eig, verify, sweep}``."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys

from . import __version__
from ._backend import BACKEND
from .config import ConfigError, load_scenario, load_sweep
from .environment import EnvironmentProfile
from .harness import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, simulate, sweep
from .spectral import SpectralConvergenceError, SpectralProblem, lambda_infinity, principal_eig


def _add_profile_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("growth profile (frozen, i.e. r(x))")
    g.add_argument("--r-const", type=float, help="constant growth rate; overrides --profile")
    g.add_argument("--profile", choices=("tanh", "bump"), default="bump")
    g.add_argument("--r-minus", type=float, default=-1.0)
    g.add_argument("--r-plus", type=float, default=None,
                   help="right-hand level (default 1 for tanh, -1 for bump)")
    g.add_argument("--r-peak", type=float, default=1.0)
    g.add_argument("--width", type=float, default=1.0)
    g.add_argument("--center", type=float, default=0.0)


def _profile_from(args) -> EnvironmentProfile:
    if args.r_const is not None:
        return EnvironmentProfile.constant(args.r_const)
    if args.profile == "tanh":
        r_plus = 1.0 if args.r_plus is None else args.r_plus
        return EnvironmentProfile.tanh(args.r_minus, r_plus, width=args.width, center=args.center)
    r_plus = -1.0 if args.r_plus is None else args.r_plus
    return EnvironmentProfile.bump(args.r_minus, r_plus, args.r_peak, width=args.width,
                                   center=args.center)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kshift",
        description="Chemotaxis with a shifting growth profile: simulation, eigenvalues, checks.",
    )
    parser.add_argument("--version", action="version", version=f"kshift {__version__} ({BACKEND})")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario file")
    s.add_argument("--config", required=True, help="key = value scenario file")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--frame", choices=("lab", "comoving"), help="override the config frame")
    s.add_argument("--strict", action="store_true", help="exit 3 if the regime is Indeterminate")

    e = sub.add_parser("eig", help="principal eigenvalue of phi'' + c phi' + r phi")
    e.add_argument("--c", type=float, default=0.0, help="shift speed")
    where = e.add_mutually_exclusive_group(required=True)
    where.add_argument("--L", type=float, help="half-length of the Dirichlet interval")
    where.add_argument("--to-infinity", action="store_true", help="limit L -> infinity")
    e.add_argument("--n", type=int, default=4096, help="mesh intervals for a fixed L")
    e.add_argument("--h", type=float, default=None, help="mesh spacing for --to-infinity")
    e.add_argument("--tol", type=float, default=1e-6, help="stopping tolerance for --to-infinity")
    e.add_argument("--max-L", type=float, default=None,
                   help="give up (exit 2) if --to-infinity has not converged by this L")
    e.add_argument("--eigenfunction", metavar="CSV", help="write x, phi to this file")
    _add_profile_flags(e)

    v = sub.add_parser("verify", help="run an acceptance suite")
    v.add_argument("suite", choices=("kernel", "spectral", "fisher", "case1", "case2", "bounds", "all"))

    w = sub.add_parser("sweep", help="run a parameter sweep")
    w.add_argument("--config", required=True, help="sweep file (scenario keys plus sweep.<key> axes)")
    w.add_argument("--out", required=True)
    w.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def cmd_simulate(args) -> int:
    try:
        scenario = load_scenario(args.config).with_frame(args.frame)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outcome = simulate(scenario, args.out, strict=args.strict)
    if outcome.exit_code == EXIT_NUMERIC:
        print(outcome.message, file=sys.stderr)
        return outcome.exit_code
    print(f"classification: {outcome.classification}")
    print(f"predicted:      {outcome.predicted} ({outcome.clause})")
    if outcome.reason:
        print(f"reason:         {outcome.reason}")
    print(f"outputs in {args.out} ({outcome.wall_time:.2f} s)")
    return outcome.exit_code


def cmd_eig(args) -> int:
    try:
        env = _profile_from(args)
        if args.to_infinity:
            res = lambda_infinity(args.c, env, tol=args.tol, h=args.h, max_L=args.max_L)
            lam, L_used, eig = res.lambda_inf, res.L_used, res.result
            print(f"lambda_inf = {lam:.10g}")
        else:
            eig = principal_eig(SpectralProblem(args.c, env, args.L, args.n))
            lam, L_used = eig.lambda_L, args.L
            print(f"lambda_L = {lam:.10g}")
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpectralConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not math.isfinite(lam):
        print("not converged: non-finite eigenvalue", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"L_used = {L_used:.10g}")
    print(f"residual = {eig.residual:.3e}")
    if args.eigenfunction:
        with open(args.eigenfunction, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "phi"])
            w.writerows((repr(float(a)), repr(float(b))) for a, b in zip(eig.x, eig.phi))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import run_suite

    results = run_suite(args.suite)
    for r in results:
        print(r.line(), flush=True)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} passed ({BACKEND} backend)")
    return EXIT_OK if failed == 0 else 1


def cmd_sweep(args) -> int:
    try:
        spec = load_sweep(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs < 1:
        print("config error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    code = sweep(spec, args.out, jobs=args.jobs)
    print(f"{spec.n_cells} cell(s); summary in {args.out}/summary.csv (exit {code})")
    return code


COMMANDS = {"simulate": cmd_simulate, "eig": cmd_eig, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors count as configuration errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
