"""Acceptance experiments, grouped into suites for ``kshift verify``.

Each criterion returns a :class:`CriterionResult`. Simulation scenarios are
cached per process so criteria that share a run (and the a-priori bound
monitor, which inspects every run) do not integrate twice.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import Regime, classify, fit_speed, track_fronts, wake_level
from .chemo import (
    ChemoParams,
    Grid,
    check_psi_bound,
    green_kernel,
    green_kernel_quadrature,
    solve_v_kernel,
    solve_v_tridiag,
)
from .environment import EnvironmentProfile, constants
from .evolution import (
    Frame,
    InitialKind,
    SimConfig,
    Trajectory,
    check_decay_envelope,
    run,
)
from .spectral import SpectralProblem, lambda_infinity, nu_star, principal_eig

__all__ = ["CriterionResult", "SUITES", "CRITERIA", "SCENARIOS", "run_suite", "run_criterion",
           "scenario_run"]

CHEMO = ChemoParams(chi=0.2, nu=1.0, mu=1.0, b=1.0)
FISHER = ChemoParams(chi=0.0, nu=1.0, mu=1.0, b=1.0)
TANH = dict(r_minus=-1.0, r_plus=1.0)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        limit = "no limit" if math.isinf(self.limit) else f"limit {self.limit:g} s"
        return f"[{tag}] {self.number:2d} {self.title}: {self.detail} ({self.seconds:.2f} s, {limit})"


def _tanh(c):
    return EnvironmentProfile.tanh(TANH["r_minus"], TANH["r_plus"], shift_speed=c)


CASE2_PERSIST = EnvironmentProfile.bump(-1.0, -1.0, 1.0, width=5.0, shift_speed=0.5)
CASE2_EXTINCT = EnvironmentProfile.bump(-1.0, -1.0, 1.0, width=1.0, shift_speed=1.5)

SCENARIOS: dict[str, Callable[[], SimConfig]] = {
    "fisher": lambda: SimConfig(Grid.from_spacing(-80, 160, 0.1), EnvironmentProfile.constant(1.0),
                                FISHER, 60.0, snapshot_dt=0.5),
    "case1_c0.5": lambda: SimConfig(Grid.from_spacing(-40, 160, 0.1), _tanh(0.5), CHEMO, 60.0,
                                    snapshot_dt=0.5),
    "case1_c3": lambda: SimConfig(Grid.from_spacing(-60, 100, 0.1), _tanh(3.0), CHEMO, 80.0,
                                  snapshot_dt=0.5),
    "case1_c-3": lambda: SimConfig(Grid.from_spacing(-120, 120, 0.1), _tanh(-3.0), CHEMO, 50.0,
                                   snapshot_dt=0.5),
    "halfline_c0.5": lambda: SimConfig(Grid.from_spacing(-40, 80, 0.1), _tanh(0.5), CHEMO, 60.0,
                                       u0_kind=InitialKind.RIGHT_HALF_LINE, u0_support=(0.0, 1.0),
                                       snapshot_dt=0.5),
    "halfline_c-3": lambda: SimConfig(Grid.from_spacing(-140, 40, 0.1), _tanh(-3.0), CHEMO, 60.0,
                                      u0_kind=InitialKind.RIGHT_HALF_LINE, u0_support=(0.0, 1.0),
                                      snapshot_dt=0.5),
    "case2_persist": lambda: SimConfig(Grid.from_spacing(-40, 40, 0.1), CASE2_PERSIST, CHEMO, 60.0,
                                       frame=Frame.COMOVING, snapshot_dt=0.5),
    "case2_extinct": lambda: SimConfig(Grid.from_spacing(-40, 40, 0.1), CASE2_EXTINCT,
                                       ChemoParams(0.2, 6.0, 1.0, 1.0), 60.0,
                                       frame=Frame.COMOVING, snapshot_dt=0.5),
    "envelope": lambda: SimConfig(Grid.from_spacing(-80, 80, 0.1), EnvironmentProfile.constant(1.0),
                                  CHEMO, 30.0, u0_support=(-3.0, 3.0), snapshot_dt=0.5),
}

_cache: dict[str, tuple[Trajectory, float]] = {}


def scenario_run(name: str) -> tuple[Trajectory, float]:
    """Run (or fetch) a named scenario; returns the trajectory and its wall time."""
    if name not in _cache:
        t0 = time.perf_counter()
        traj = run(SCENARIOS[name]())
        _cache[name] = (traj, time.perf_counter() - t0)
    return _cache[name]


def clear_cache():
    _cache.clear()


def _timed(number, title, limit):
    def wrap(fn):
        def inner() -> CriterionResult:
            t0 = time.perf_counter()
            ok, detail, extra = fn()
            seconds = time.perf_counter() - t0 + extra
            passed = bool(ok) and seconds <= limit
            if ok and not passed:
                detail += "; over the runtime limit"
            return CriterionResult(number, title, passed, detail, seconds, limit)
        inner.number = number
        return inner
    return wrap


# 1-2: elliptic solver ---------------------------------------------------------

@_timed(1, "Green kernel identity and solver agreement", 1.0)
def criterion_1():
    worst_q = 0.0
    for nu in (0.25, 1.0, 4.0):
        for z in (0.0, 0.5, 1.0, 2.0):
            worst_q = max(worst_q, abs(green_kernel_quadrature(z, nu) - float(green_kernel(z, nu))))
    grid = Grid(-10.0, 10.0, 4001)
    params = ChemoParams(chi=0.0, nu=4.0, mu=1.0, b=1.0)
    u = np.exp(-grid.x**2)
    gap = float(np.max(np.abs(solve_v_kernel(u, grid, params) - solve_v_tridiag(u, grid, params))))
    ok = worst_q <= 1e-8 and gap <= 1e-5
    return ok, f"quadrature gap {worst_q:.2e} (<= 1e-8), solver gap {gap:.2e} (<= 1e-5)", 0.0


def random_compact_u(rng: np.random.Generator, grid: Grid) -> np.ndarray:
    """Nonnegative data supported in a random subinterval: smooth bumps plus a rough patch."""
    x = grid.x
    lo = rng.uniform(-12.0, 0.0)
    hi = rng.uniform(lo + 1.0, 12.0)
    u = np.zeros_like(x)
    for _ in range(rng.integers(1, 5)):
        c = rng.uniform(lo, hi)
        w = rng.uniform(0.2, 3.0)
        u += rng.uniform(0.0, 2.0) * np.exp(-((x - c) / w) ** 2)
    if rng.random() < 0.5:
        a = rng.uniform(lo, hi)
        b = rng.uniform(a, hi)
        patch = (x >= a) & (x <= b)
        u[patch] += rng.uniform(0.0, 1.0, patch.sum())
    u[(x < lo) | (x > hi)] = 0.0
    return u


@_timed(2, "Attractant gradient bound |v_x| <= sqrt(nu) v", 5.0)
def criterion_2():
    rng = np.random.default_rng(20240601)
    grid = Grid.from_spacing(-20.0, 20.0, 0.02)
    worst = -math.inf
    fails = 0
    for _ in range(100):
        params = ChemoParams(chi=0.0, nu=rng.uniform(0.25, 4.0), mu=rng.uniform(0.5, 2.0), b=1.0)
        rep = check_psi_bound(random_compact_u(rng, grid), grid, params)
        worst = max(worst, rep.max_violation - rep.tol)
        fails += not rep.passed
    return fails == 0, f"{fails}/100 draws over tolerance; max(violation - tol) = {worst:.2e}", 0.0


# 3-4: spectral ------------------------------------------------------------------

@_timed(3, "Principal eigenpair for constant r on (-pi, pi)", 2.0)
def criterion_3():
    L = math.pi
    env = EnvironmentProfile.constant(1.0)
    parts, ok = [], True
    for c in (0.0, 1.0, 2.0):
        res = principal_eig(SpectralProblem(c, env, L, 4096))
        exact = (4.0 - c * c - math.pi**2 / L**2) / 4.0
        ref = np.exp(-0.5 * c * res.x) * np.cos(math.pi * res.x / (2 * L))
        ref /= ref.max()
        lam_err = abs(res.lambda_L - exact)
        phi_err = float(np.max(np.abs(res.phi - ref)))
        ok &= lam_err <= 1e-4 and phi_err <= 1e-4
        parts.append(f"c={c:g}: dlambda {lam_err:.1e}, dphi {phi_err:.1e}")
    return ok, "; ".join(parts), 0.0


def random_bump(rng: np.random.Generator) -> tuple[EnvironmentProfile, float]:
    env = EnvironmentProfile.bump(
        rng.uniform(-2.0, -0.1), rng.uniform(-2.0, -0.1), rng.uniform(0.2, 2.0),
        width=rng.uniform(0.5, 3.0), center=rng.uniform(-2.0, 2.0),
    )
    return env, rng.uniform(-1.5, 1.5)


@_timed(4, "Eigenvalue monotonicity and bounds on random bumps", 10.0)
def criterion_4():
    rng = np.random.default_rng(7)
    h = 0.05
    problems = []
    for k in range(10):
        env, c = random_bump(rng)
        r_star = constants(env).r_star
        lams = [principal_eig(SpectralProblem(c, env, L, int(round(2 * L / h)))).lambda_L
                for L in (1.0, 2.0, 4.0, 8.0)]
        if not all(b > a for a, b in zip(lams, lams[1:])):
            problems.append(f"profile {k}: not increasing {lams}")
        L, n = 8.0, int(round(16.0 / h))
        lam_r = lams[-1]
        lam_top = principal_eig(SpectralProblem(c, EnvironmentProfile.constant(r_star), L, n)).lambda_L
        if not (lam_r <= lam_top < r_star):
            problems.append(f"profile {k}: {lam_r:.6g} <= {lam_top:.6g} < {r_star:.6g} fails")
        lam_inf = lambda_infinity(c, env, tol=1e-6).lambda_inf
        if lam_inf > r_star + 1e-4:
            problems.append(f"profile {k}: lambda_inf {lam_inf:.6g} > r* + 1e-4")
    detail = "10 profiles, L = 1, 2, 4, 8" if not problems else "; ".join(problems)
    return not problems, detail, 0.0


# 5-9: dynamics ------------------------------------------------------------------

@_timed(5, "Fisher baseline speed and wake (chi = 0)", 60.0)
def criterion_5():
    traj, secs = scenario_run("fisher")
    front = track_fronts(traj, 0.01)
    fit = fit_speed(front, side="right", t_range=(20.0, 60.0))
    wake = wake_level(traj, (0.0, 1.0))
    ok = abs(fit.speed - 2.0) <= 0.05 * 2.0 and abs(wake - 1.0) <= 0.02
    return ok, f"right speed {fit.speed:.4f} (2 +- 5%), wake {wake:.4f} (1 +- 2%)", secs


@_timed(6, "Spreading along the shift, c = 0.5", 180.0)
def criterion_6():
    traj, secs = scenario_run("case1_c0.5")
    rep = classify(traj)
    c, cs = 0.5, 2.0
    ok = (rep.classification is Regime.SPREAD_ALONG_SHIFT
          and rep.left_speed is not None and abs(rep.left_speed - c) <= 0.15
          and rep.right_speed is not None and abs(rep.right_speed - cs) <= 0.15
          and rep.wake_level is not None and abs(rep.wake_level - 1.0) <= 0.05)
    return ok, (f"{rep.classification.value}; left {rep.left_speed:.4f}, right {rep.right_speed:.4f}, "
                f"wake {rep.wake_level:.4f}"), secs


@_timed(7, "Extinction at c = 3, two-sided spread at c = -3", 360.0)
def criterion_7():
    ext, s1 = scenario_run("case1_c3")
    both, s2 = scenario_run("case1_c-3")
    sup = float(ext.u[-1].max())
    rep = classify(both)
    speeds_ok = (rep.right_speed is not None and rep.left_speed is not None
                 and abs(rep.right_speed - 2.0) <= 0.075 * 2.0
                 and abs(rep.left_speed + 2.0) <= 0.075 * 2.0)
    ok = sup < 1e-4 and speeds_ok and s1 <= 180.0 and s2 <= 180.0
    return ok, (f"c=3 final sup {sup:.2e} (< 1e-4); c=-3 {rep.classification.value}, "
                f"right {rep.right_speed:.4f}, left {rep.left_speed:.4f}"), s1 + s2


@_timed(8, "Right half-line data: left front speed", 360.0)
def criterion_8():
    parts, ok, total = [], True, 0.0
    for name, target in (("halfline_c0.5", 0.5), ("halfline_c-3", -2.0)):
        traj, secs = scenario_run(name)
        total += secs
        left = fit_speed(track_fronts(traj, 0.01), side="left")
        ok &= abs(left.speed - target) <= 0.15 and secs <= 180.0
        parts.append(f"c={traj.cfg.env.shift_speed:g}: left {left.speed:.4f} (target {target:g})")
    return ok, "; ".join(parts), total


@_timed(9, "Persistence or extinction around a moving patch", 300.0)
def criterion_9():
    p_traj, s1 = scenario_run("case2_persist")
    e_traj, s2 = scenario_run("case2_extinct")
    lam_p = lambda_infinity(CASE2_PERSIST.shift_speed, CASE2_PERSIST, tol=1e-6).lambda_inf
    lam_e = lambda_infinity(CASE2_EXTINCT.shift_speed, CASE2_EXTINCT, tol=1e-6).lambda_inf
    ns = nu_star(CASE2_EXTINCT.shift_speed, constants(CASE2_EXTINCT))
    rep = classify(p_traj, spectral=lam_p)
    window_min = rep.diagnostics["comoving_window_min"]
    sup = float(e_traj.u[-1].max())
    ok = (lam_p > 0 and window_min > 1e-3 and lam_e < 0
          and e_traj.cfg.params.nu >= ns and sup < 1e-4)
    return ok, (f"lambda_inf {lam_p:.4f} -> window min {window_min:.3f} (> 1e-3); "
                f"lambda_inf {lam_e:.4f}, nu 6 >= nu* {ns:.3f} -> final sup {sup:.1e} (< 1e-4)"), s1 + s2


# 10-12: bounds and scheme ---------------------------------------------------------

@_timed(10, "A-priori sup bound over all acceptance runs", math.inf)
def criterion_10():
    bad, checked = [], 0
    total = 0.0
    for name in SCENARIOS:
        traj, secs = scenario_run(name)
        total += secs
        p = traj.cfg.params
        if p.b <= p.chi * p.mu:
            continue
        checked += 1
        if not traj.stats.sup_u <= traj.stats.bound + 1e-6:
            bad.append(f"{name}: {traj.stats.sup_u:.6g} > {traj.stats.bound:.6g}")
    return not bad, f"{checked} runs checked" + ("" if not bad else "; " + "; ".join(bad)), 0.0


@_timed(11, "Exponential decay envelope, constant r", 120.0)
def criterion_11():
    traj, secs = scenario_run("envelope")
    consts = constants(traj.cfg.env)
    parts, ok = [], True
    for factor in (0.5, 1.0):
        rep = check_decay_envelope(traj, factor * math.sqrt(consts.r_star), None, consts)
        ok &= rep.passed
        parts.append(f"kappa={rep.kappa:g}: " + (f"max ratio {rep.max_ratio:.4f}" if rep.skipped is None
                                                   else f"skipped ({rep.skipped})"))
    return ok, "; ".join(parts), secs


def scheme_errors(levels: int = 3) -> list[float]:
    """Errors of the chi = 0 scheme at h0/2^k, dt0/4^k against level ``levels``."""
    env = EnvironmentProfile.tanh(-1.0, 1.0, width=2.0)
    h0 = 0.2
    sols = []
    for k in range(levels + 1):
        h = h0 / 2**k
        cfg = SimConfig(Grid.from_spacing(-20.0, 20.0, h), env, FISHER, 2.0,
                        dt=0.2 * h0 * h0 / 4**k, snapshot_dt=2.0, check_every=0)
        sols.append(run(cfg).u[-1])
    ref = sols[-1]
    return [float(np.max(np.abs(s - ref[:: 2 ** (levels - k)]))) for k, s in enumerate(sols[:-1])]


@_timed(12, "Scheme order under h -> h/2, dt -> dt/4", 120.0)
def criterion_12():
    errs = scheme_errors()
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(r >= 3.5 for r in ratios)
    return ok, ("errors " + ", ".join(f"{e:.2e}" for e in errs)
                + "; ratios " + ", ".join(f"{r:.2f}" for r in ratios)), 0.0


CRITERIA = {f.number: f for f in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                  criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
                                  criterion_11, criterion_12)}

SUITES = {
    "kernel": (1, 2),
    "spectral": (3, 4),
    "fisher": (5,),
    "case1": (6, 7, 8),
    "case2": (9,),
    "bounds": (10, 11, 12),
}


def run_criterion(number: int) -> CriterionResult:
    return CRITERIA[number]()


def run_suite(name: str) -> list[CriterionResult]:
    if name == "all":
        numbers = sorted(CRITERIA)
    elif name in SUITES:
        numbers = SUITES[name]
    else:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    return [run_criterion(n) for n in numbers]
