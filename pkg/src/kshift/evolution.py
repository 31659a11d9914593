"""Explicit time stepping of u_t = u_xx - chi (u v_x)_x + u (r(x - ct) - b u).

The attractant v is slaved to u through the elliptic solve at every step.
Transport uses a conservative upwind flux; with the step-size rule used by
:func:`run` every update is a nonnegative combination of old values, so
positivity and the a-priori sup bound hold at the discrete level.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ._backend import upwind_step
from .chemo import (
    ChemoParams,
    Grid,
    check_psi_bound,
    solve_v_kernel,
    solve_v_tridiag,
)
from .environment import EnvConstants, EnvironmentProfile, constants

logger = logging.getLogger(__name__)

__all__ = [
    "InitialKind",
    "Frame",
    "SimConfig",
    "SimState",
    "RunStats",
    "Trajectory",
    "CFLError",
    "NumericalError",
    "EnvelopeReport",
    "initial_condition",
    "c_kappa",
    "step",
    "run",
    "sup_bound",
    "check_decay_envelope",
]


class CFLError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


class InitialKind(str, enum.Enum):
    COMPACT_BUMP = "compact_bump"
    RIGHT_HALF_LINE = "right_half_line"
    CONSTANT = "constant"


class Frame(str, enum.Enum):
    LAB = "lab"
    COMOVING = "comoving"


@dataclass(frozen=True)
class SimConfig:
    """One scenario. In the comoving frame grid coordinates are xi = x - c t."""

    grid: Grid
    env: EnvironmentProfile
    params: ChemoParams
    t_end: float
    cfl_safety: float = 0.9
    u0_kind: InitialKind = InitialKind.COMPACT_BUMP
    u0_amplitude: float = 1.0
    u0_support: tuple[float, float] = (-5.0, 5.0)
    frame: Frame = Frame.LAB
    snapshot_dt: float | None = None
    dt: float | None = None
    check_every: int = 100
    v_bc: tuple[str, str] | None = None

    def __post_init__(self):
        object.__setattr__(self, "u0_kind", InitialKind(self.u0_kind))
        object.__setattr__(self, "frame", Frame(self.frame))
        object.__setattr__(self, "u0_support", tuple(float(s) for s in self.u0_support))
        if not self.t_end >= 0:
            raise ValueError("t_end must be >= 0")
        if not 0 < self.cfl_safety < 1:
            raise ValueError("cfl_safety must lie in (0, 1)")
        if not self.u0_amplitude > 0:
            raise ValueError("u0_amplitude must be positive")
        lo, hi = self.u0_support
        if not hi > lo:
            raise ValueError("u0_support must be a nonempty interval")
        if self.snapshot_dt is not None and not self.snapshot_dt > 0:
            raise ValueError("snapshot_dt must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")

    @property
    def frame_speed(self) -> float:
        return self.env.shift_speed if self.frame is Frame.COMOVING else 0.0

    @property
    def boundary(self) -> tuple[str, str]:
        """v end conditions: decay where u vanishes, reflection where it does not."""
        if self.v_bc is not None:
            return self.v_bc
        if self.u0_kind is InitialKind.CONSTANT:
            return ("neumann", "neumann")
        if self.u0_kind is InitialKind.RIGHT_HALF_LINE:
            return ("robin", "neumann")
        return ("robin", "robin")

    def containment_issues(self) -> list[str]:
        """Sides where a front could reach the grid end before t_end."""
        consts = constants(self.env)
        reach = max(abs(self.env.shift_speed), consts.c_star) * self.t_end
        margin = 10.0 / math.sqrt(self.params.nu)
        lo, hi = self.u0_support
        issues = []
        if self.u0_kind is InitialKind.CONSTANT:
            return issues
        if lo - reach - margin < self.grid.x_min:
            issues.append("left")
        if self.u0_kind is InitialKind.COMPACT_BUMP and hi + reach + margin > self.grid.x_max:
            issues.append("right")
        return issues


@dataclass(frozen=True)
class SimState:
    t: float
    u: np.ndarray
    v: np.ndarray


def _smooth_step(s):
    """C-infinity ramp: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def initial_condition(cfg: SimConfig) -> np.ndarray:
    x = cfg.grid.x
    amp = cfg.u0_amplitude
    lo, hi = cfg.u0_support
    if cfg.u0_kind is InitialKind.CONSTANT:
        return np.full_like(x, amp)
    if cfg.u0_kind is InitialKind.RIGHT_HALF_LINE:
        ramp = min(1.0, hi - lo)
        return amp * _smooth_step((x - lo) / ramp)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    s = (x - mid) / half
    inside = np.abs(s) < 1
    out = np.zeros_like(x)
    out[inside] = amp * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def sup_bound(u0_max: float, params: ChemoParams, consts: EnvConstants) -> float:
    """max(||u0||, r*/(b - chi mu)); infinite when b <= chi mu."""
    gap = params.b - params.chi * params.mu
    if gap <= 0:
        return math.inf
    return max(u0_max, consts.r_star / gap)


class _Stepper:
    """Per-run cache of everything that does not change between steps."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.grid = cfg.grid
        self.h = cfg.grid.h
        self.params = cfg.params
        self.consts = constants(cfg.env)
        self.drift = -cfg.frame_speed
        self.bc = cfg.boundary
        self.max_abs_r = max(abs(self.consts.r_star), abs(self.consts.r_star_low))
        self._r_static = cfg.env(cfg.grid.x) if cfg.frame is Frame.COMOVING else None
        self._out = np.empty(cfg.grid.n_nodes)

    def r_at(self, t: float) -> np.ndarray:
        if self._r_static is not None:
            return self._r_static
        return self.cfg.env(self.grid.x - self.cfg.env.shift_speed * t)

    def solve_v(self, u):
        return solve_v_tridiag(u, self.grid, self.params, self.bc)

    def face_speed_max(self, v) -> float:
        return self.params.chi * float(np.max(np.abs(np.diff(v)))) / self.h + abs(self.drift)

    def auto_dt(self, u, v) -> float:
        h = self.h
        rate = (2.0 / (h * h) + 2.0 * self.face_speed_max(v) / h + self.max_abs_r
                + self.params.b * float(u.max()) + 1.0)
        return self.cfg.cfl_safety / rate

    def dt_limit(self, u, v) -> float:
        h = self.h
        w = self.face_speed_max(v)
        return self.cfg.cfl_safety * min(
            0.5 * h * h,
            h / (w + 1e-12),
            1.0 / (self.consts.r_star + self.params.b * float(u.max()) + 1.0),
        )

    def advance(self, u, v, t, dt):
        """Returns (u_new, clipped_mass). ``u_new`` is a fresh array."""
        out = np.empty_like(u)
        clipped = upwind_step(u, v, self.r_at(t), self.h, dt, self.params.chi,
                              self.params.b, self.drift, out)
        top = float(out.max())
        if not math.isfinite(top) or not math.isfinite(clipped):
            raise NumericalError(f"non-finite u at t={t + dt:.6g} (dt={dt:.3g})")
        return out, clipped


def step(state: SimState, cfg: SimConfig, dt: float) -> SimState:
    """Advance one forward-Euler step of size ``dt`` and re-solve v."""
    stepper = _Stepper(cfg)
    limit = stepper.dt_limit(state.u, state.v)
    if dt > limit * (1 + 1e-12):
        raise CFLError(f"dt={dt:.4g} exceeds stability limit {limit:.4g}")
    u_new, clipped = stepper.advance(state.u, state.v, state.t, dt)
    if clipped > 0:
        logger.debug("clipped mass %.3e at t=%.6g", clipped, state.t + dt)
    return SimState(state.t + dt, u_new, stepper.solve_v(u_new))


@dataclass
class RunStats:
    steps: int = 0
    sup_u: float = 0.0
    bound: float = math.inf
    clipped_total: float = 0.0
    clip_ratio_max: float = 0.0
    kernel_gap_max: float = 0.0
    kernel_gap_tol_min: float = math.inf
    kernel_checks: int = 0
    psi_excess_max: float = -math.inf  # max of (violation - tol); <= 0 means bound held
    warnings: list[str] = field(default_factory=list)

    @property
    def bound_ok(self) -> bool:
        return self.sup_u <= self.bound + 1e-6


@dataclass
class Trajectory:
    cfg: SimConfig
    times: np.ndarray
    u: np.ndarray  # (snapshots, nodes)
    v: np.ndarray
    stats: RunStats

    @property
    def grid(self) -> Grid:
        return self.cfg.grid

    @property
    def frame_speed(self) -> float:
        return self.cfg.frame_speed

    def lab_x(self, k: int) -> np.ndarray:
        """Lab-frame node positions at snapshot ``k``."""
        return self.grid.x + self.frame_speed * self.times[k]

    def states(self):
        for t, u, v in zip(self.times, self.u, self.v):
            yield SimState(float(t), u, v)

    def __len__(self):
        return len(self.times)


def _snapshot_times(cfg: SimConfig) -> np.ndarray:
    if cfg.t_end == 0:
        return np.array([0.0])
    dt_snap = cfg.snapshot_dt or cfg.t_end / 200.0
    k = max(1, int(round(cfg.t_end / dt_snap)))
    return np.linspace(0.0, cfg.t_end, k + 1)


def _cross_check(stepper: _Stepper, u, v, stats: RunStats):
    grid, params = stepper.grid, stepper.params
    vk = solve_v_kernel(u, grid, params)
    mask = np.ones(grid.n_nodes, dtype=bool)
    reach = 15.0 / math.sqrt(params.nu)
    if stepper.bc[0] == "neumann":
        mask &= grid.x > grid.x_min + reach
    if stepper.bc[1] == "neumann":
        mask &= grid.x < grid.x_max - reach
    if mask.any():
        gap = float(np.max(np.abs(vk[mask] - v[mask])))
        tol = max(1e-5, 10.0 * grid.h**2 * params.mu * float(u.max()))
        stats.kernel_gap_max = max(stats.kernel_gap_max, gap)
        stats.kernel_gap_tol_min = min(stats.kernel_gap_tol_min, tol)
        stats.kernel_checks += 1
    rep = check_psi_bound(u, grid, params, v=v)
    stats.psi_excess_max = max(stats.psi_excess_max, rep.max_violation - rep.tol)


def run(cfg: SimConfig, observers: Sequence[Callable[[SimState], None]] = ()) -> Trajectory:
    """Integrate to ``cfg.t_end`` and return the snapshot trajectory."""
    p = cfg.params
    if p.b <= p.chi * p.mu:
        logger.warning("b <= chi*mu (%.4g <= %.4g): finite-time blow-up is not excluded",
                       p.b, p.chi * p.mu)
    stepper = _Stepper(cfg)
    stats = RunStats()
    if p.b <= p.chi * p.mu:
        stats.warnings.append("b <= chi*mu: global boundedness not guaranteed")
    for side in cfg.containment_issues():
        msg = f"fronts may reach the {side} grid end before t_end"
        logger.info(msg)
        stats.warnings.append(msg)

    u = initial_condition(cfg)
    v = stepper.solve_v(u)
    stats.bound = sup_bound(float(u.max()), p, stepper.consts)
    stats.sup_u = float(u.max())

    targets = _snapshot_times(cfg)
    times, us, vs = [0.0], [u], [v]
    for obs in observers:
        obs(SimState(0.0, u, v))

    t = 0.0
    for target in targets[1:]:
        while t < target:
            if cfg.dt is not None:
                dt = cfg.dt
                limit = stepper.dt_limit(u, v)
                if dt > limit * (1 + 1e-12):
                    raise CFLError(f"fixed dt={dt:.4g} exceeds stability limit {limit:.4g} at t={t:.4g}")
            else:
                dt = stepper.auto_dt(u, v)
            # land exactly on snapshot times; absorb float slop into the last step
            if t + dt >= target - 1e-12 * max(1.0, target):
                dt = target - t
            u, clipped = stepper.advance(u, v, t, dt)
            t = target if dt == target - t else t + dt
            v = stepper.solve_v(u)
            stats.steps += 1
            stats.sup_u = max(stats.sup_u, float(u.max()))
            if clipped > 0:
                stats.clipped_total += clipped
                mass = cfg.grid.h * float(u.sum())
                if mass > 0:
                    stats.clip_ratio_max = max(stats.clip_ratio_max, clipped / mass)
            if cfg.check_every and stats.steps % cfg.check_every == 0:
                _cross_check(stepper, u, v, stats)
        times.append(t)
        us.append(u)
        vs.append(v)
        state = SimState(t, u, v)
        for obs in observers:
            obs(state)

    if stats.kernel_checks and stats.kernel_gap_max > stats.kernel_gap_tol_min:
        stats.warnings.append(
            f"kernel/tridiagonal v disagreement {stats.kernel_gap_max:.3e} "
            f"(tol {stats.kernel_gap_tol_min:.3e}); support near a decay boundary?"
        )
    return Trajectory(cfg, np.array(times), np.array(us), np.array(vs), stats)


@dataclass(frozen=True)
class EnvelopeReport:
    kappa: float
    c_kappa: float
    M: float
    max_ratio: float
    tol: float
    skipped: str | None = None

    @property
    def passed(self) -> bool:
        return self.skipped is None and self.max_ratio <= 1.0 + self.tol


def c_kappa(kappa: float, r_star: float) -> float:
    """Envelope speed (kappa^2 + r*) / kappa."""
    return (kappa * kappa + r_star) / kappa


def default_envelope_height(traj: Trajectory, consts: EnvConstants) -> float:
    """10 max(||u0||, r*/(b - chi mu)), a concrete reading of 'M much larger'."""
    p = traj.cfg.params
    return 10.0 * sup_bound(float(traj.u[0].max()), p, consts)


def check_decay_envelope(traj: Trajectory, kappa: float, M: float | None,
                         env: EnvConstants, tol: float = 1e-3) -> EnvelopeReport:
    """Verify u(t, x) <= M exp(-kappa (|x| - c_kappa t)) at every snapshot node."""
    p = traj.cfg.params
    ck = c_kappa(kappa, env.r_star) if kappa > 0 else math.inf
    if M is None:
        M = default_envelope_height(traj, env)

    def skip(reason):
        return EnvelopeReport(kappa, ck, M, math.nan, tol, skipped=reason)

    if not 0 < kappa <= math.sqrt(env.r_star) * (1 + 1e-12):
        return skip("kappa must lie in (0, sqrt(r*)]")
    if p.b <= p.chi * p.mu:
        return skip("requires b > chi*mu")
    if p.chi * p.mu > 0:
        lhs = max(kappa - math.sqrt(p.nu), 0.0) / (kappa + math.sqrt(p.nu))
        if lhs > 2.0 * (p.b - p.chi * p.mu) / (p.chi * p.mu):
            return skip("kappa violates the attractant-decay clause")
    x0 = traj.lab_x(0)
    u0 = traj.u[0]
    if np.any(u0 > np.minimum(M, M * np.exp(-kappa * np.abs(x0))) * (1 + 1e-12)):
        return skip("initial data not dominated by min(M, M exp(-kappa|x|))")

    worst = 0.0
    log_m = math.log(M)
    for k, t in enumerate(traj.times):
        u = traj.u[k]
        pos = u > 0
        if not pos.any():
            continue
        x = traj.lab_x(k)[pos]
        log_ratio = np.log(u[pos]) - (log_m - kappa * (np.abs(x) - ck * t))
        worst = max(worst, float(np.exp(log_ratio.max())))
    return EnvelopeReport(kappa, ck, M, worst, tol)


def with_overrides(cfg: SimConfig, **changes) -> SimConfig:
    return replace(cfg, **changes)
