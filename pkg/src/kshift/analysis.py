"""Front tracking, speed fits, wake levels and regime classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from .chemo import ChemoParams
from .environment import EnvConstants, ProfileKind, constants
from .evolution import InitialKind, SimConfig, Trajectory
from .spectral import nu_star

__all__ = [
    "Regime",
    "H1Verdict",
    "FrontTrajectory",
    "SpeedFit",
    "RegimeReport",
    "Prediction",
    "InsufficientSamples",
    "check_h1",
    "track_fronts",
    "fit_speed",
    "wake_level",
    "classify",
    "predict_regime",
    "EXTINCT_BAR",
    "PERSIST_BAR",
]

EXTINCT_BAR = 1e-4
PERSIST_BAR = 1e-3
LATE_FRACTION = 0.2


class Regime(str, enum.Enum):
    EXTINCTION = "Extinction"
    SPREAD_BOTH = "SpreadBothDirections"
    SPREAD_ALONG_SHIFT = "SpreadAlongShift"
    PERSIST_AROUND_SHIFT = "PersistAroundShift"
    INDETERMINATE = "Indeterminate"


class InsufficientSamples(ValueError):
    pass


@dataclass(frozen=True)
class H1Verdict:
    holds: bool
    b_min_required: float
    margin: float


def check_h1(params: ChemoParams, env: EnvConstants) -> H1Verdict:
    """b > chi mu and b >= (1 + (sqrt r* - sqrt nu)_+ / (2 (sqrt r* + sqrt nu))) chi mu."""
    sr, sn = math.sqrt(env.r_star), math.sqrt(params.nu)
    chimu = params.chi * params.mu
    b_min = (1.0 + 0.5 * max(sr - sn, 0.0) / (sr + sn)) * chimu
    holds = params.b > chimu and params.b >= b_min
    return H1Verdict(holds, b_min, params.b - max(chimu, b_min))


@dataclass
class FrontTrajectory:
    """Lab-frame level-set positions. NaN marks an absent front; ``*_pinned``
    flags samples where u >= level reaches the grid end (no crossing exists)."""

    level: float
    times: np.ndarray
    right_front: np.ndarray
    left_front: np.ndarray
    right_pinned: np.ndarray
    left_pinned: np.ndarray
    h: float = 0.0


def _crossing(x, u, level, side):
    above = np.flatnonzero(u >= level)
    if above.size == 0:
        return math.nan, False
    if side == "right":
        i = above[-1]
        if i == len(u) - 1:
            return math.nan, True
        j = i + 1
    else:
        i = above[0]
        if i == 0:
            return math.nan, True
        j = i - 1
    # linear interpolation between the last node above and the first below
    frac = (u[i] - level) / (u[i] - u[j])
    return x[i] + frac * (x[j] - x[i]), False


def track_fronts(traj: Trajectory, level: float) -> FrontTrajectory:
    if not level > 0:
        raise ValueError("level must be positive")
    m = len(traj.times)
    right, left = np.full(m, math.nan), np.full(m, math.nan)
    rp, lp = np.zeros(m, bool), np.zeros(m, bool)
    for k in range(m):
        x = traj.lab_x(k)
        right[k], rp[k] = _crossing(x, traj.u[k], level, "right")
        left[k], lp[k] = _crossing(x, traj.u[k], level, "left")
    return FrontTrajectory(level, np.asarray(traj.times, float), right, left, rp, lp, traj.grid.h)


@dataclass(frozen=True)
class SpeedFit:
    speed: float
    stderr: float
    n: int
    t_start: float
    t_stop: float


def fit_speed(front: FrontTrajectory, window: float = LATE_FRACTION, side: str = "right",
              t_range: tuple[float, float] | None = None) -> SpeedFit:
    """Least-squares slope of front position against time over the final
    ``window`` fraction of the run (or over an explicit ``t_range``)."""
    pos = front.right_front if side == "right" else front.left_front
    t = front.times
    if t_range is None:
        t0 = t[-1] - window * (t[-1] - t[0])
        t1 = t[-1]
    else:
        t0, t1 = t_range
    sel = (t >= t0 - 1e-9) & (t <= t1 + 1e-9) & np.isfinite(pos)
    if sel.sum() < 5:
        raise InsufficientSamples(f"{side} front has {int(sel.sum())} samples in [{t0:g}, {t1:g}]")
    fit = stats.linregress(t[sel], pos[sel])
    return SpeedFit(float(fit.slope), float(fit.stderr), int(sel.sum()), float(t0), float(t1))


def wake_level(traj: Trajectory, probe: tuple[float, float], window: float = LATE_FRACTION) -> float:
    """Time-average of u at the lab position ``x0 + s t`` over the final window.

    ``probe`` is ``(x0, s)``.
    """
    x0, s = probe
    t = traj.times
    t0 = t[-1] - window * (t[-1] - t[0])
    vals = []
    for k in np.flatnonzero(t >= t0 - 1e-9):
        xi = x0 + s * t[k] - traj.frame_speed * t[k]
        if not traj.grid.x_min <= xi <= traj.grid.x_max:
            raise ValueError(f"probe left the grid at t={t[k]:g} (x={x0 + s * t[k]:g})")
        vals.append(np.interp(xi, traj.grid.x, traj.u[k]))
    if len(vals) == 1:
        return float(vals[0])
    # trapezoid time-average; snapshots need not be uniform
    tt = t[t >= t0 - 1e-9]
    return float(integrate.trapezoid(vals, tt) / (tt[-1] - tt[0]))


@dataclass(frozen=True)
class Prediction:
    regime: Regime
    clause: str


def predict_regime(cfg: SimConfig, lambda_inf: float | None = None,
                   lambda_tol: float = 1e-4) -> Prediction:
    """Regime the spreading/extinction results assign to ``cfg`` (Indeterminate where none applies)."""
    env = cfg.env
    consts = constants(env)
    c, cs = env.shift_speed, consts.c_star
    h1 = check_h1(cfg.params, consts)
    if not h1.holds:
        return Prediction(Regime.INDETERMINATE, "H1 fails: no regime result applies")

    if env.kind is ProfileKind.CONSTANT:
        if cfg.u0_kind is InitialKind.COMPACT_BUMP:
            return Prediction(Regime.SPREAD_BOTH, "constant r: spreading at 2 sqrt(r)")
        return Prediction(Regime.INDETERMINATE, "constant r, non-compact data: homogeneous state r/b")

    if env.kind is ProfileKind.TANH:
        if cfg.u0_kind is InitialKind.COMPACT_BUMP:
            if c > cs:
                return Prediction(Regime.EXTINCTION, "tanh habitat, compact data: c > c*")
            if -cs <= c < cs:
                return Prediction(Regime.SPREAD_ALONG_SHIFT, "tanh habitat, compact data: -c* <= c < c*")
            if c < -cs:
                return Prediction(Regime.SPREAD_BOTH, "tanh habitat, compact data: c < -c*")
            return Prediction(Regime.INDETERMINATE, "c = c*: borderline, not covered")
        if cfg.u0_kind is InitialKind.RIGHT_HALF_LINE:
            if c >= -cs:
                return Prediction(Regime.SPREAD_ALONG_SHIFT, "tanh habitat, right half-line data: c >= -c*")
            return Prediction(Regime.SPREAD_BOTH, "tanh habitat, right half-line data: c < -c*")
        return Prediction(Regime.INDETERMINATE, "constant data on a tanh habitat: not covered")

    if cfg.u0_kind is not InitialKind.COMPACT_BUMP:
        return Prediction(Regime.INDETERMINATE, "bump habitat needs compact data")
    if abs(c) > cs:
        return Prediction(Regime.EXTINCTION, "bump habitat: |c| > c*")
    if lambda_inf is None:
        return Prediction(Regime.INDETERMINATE, "bump habitat: lambda_inf not supplied")
    if abs(lambda_inf) < 2 * lambda_tol:
        return Prediction(Regime.INDETERMINATE, "|lambda_inf| within tolerance of 0 (open case)")
    if lambda_inf < 0 and cfg.params.nu >= nu_star(c, consts):
        return Prediction(Regime.EXTINCTION, "bump habitat: lambda_inf < 0 and nu >= nu*")
    if abs(c) < cs and lambda_inf > 0:
        return Prediction(Regime.PERSIST_AROUND_SHIFT, "bump habitat: |c| < c* and lambda_inf > 0")
    return Prediction(Regime.INDETERMINATE, "bump habitat: lambda_inf < 0 with nu < nu*, not covered")


@dataclass
class RegimeReport:
    classification: Regime
    right_speed: float | None = None
    left_speed: float | None = None
    wake_level: float | None = None
    diagnostics: dict[str, object] = field(default_factory=dict)

    def summary_lines(self) -> list[str]:
        lines = [f"classification = {self.classification.value}"]
        for name in ("right_speed", "left_speed", "wake_level"):
            val = getattr(self, name)
            lines.append(f"{name} = {'absent' if val is None else f'{val:.6g}'}")
        for key, val in self.diagnostics.items():
            lines.append(f"{key} = {val:.6g}" if isinstance(val, float) else f"{key} = {val}")
        return lines


def _try_fit(front, side, window):
    try:
        return fit_speed(front, window, side)
    except InsufficientSamples:
        return None


def _late(times, window):
    return times >= times[-1] - window * (times[-1] - times[0]) - 1e-9


def classify(traj: Trajectory, cfg: SimConfig | None = None, spectral=None, *,
             level: float | None = None, window: float = LATE_FRACTION,
             persist_halfwidth: float = 2.0, lambda_tol: float = 1e-4) -> RegimeReport:
    """Classify a finished run against the predicted regimes.

    ``spectral`` may be a lambda_inf value or an object with ``lambda_inf``.
    """
    cfg = cfg or traj.cfg
    env, params = cfg.env, cfg.params
    consts = constants(env)
    c, cs = env.shift_speed, consts.c_star
    lam = getattr(spectral, "lambda_inf", spectral)
    if level is None:
        level = 0.01 * consts.r_star / params.b
    pred = predict_regime(cfg, lam, lambda_tol)
    h1 = check_h1(params, consts)

    diag: dict[str, object] = {
        "predicted": pred.regime.value,
        "clause": pred.clause,
        "c": float(c),
        "c_star": cs,
        "H1": h1.holds,
        "H1_margin": h1.margin,
        "front_level": level,
        "final_sup_u": float(traj.u[-1].max()),
        "sup_u_all_steps": traj.stats.sup_u,
        "sup_bound": traj.stats.bound,
    }
    if lam is not None:
        diag["lambda_inf"] = float(lam)
        diag["nu_star"] = nu_star(c, consts)
    if params.chi * params.mu < params.b <= 2 * params.chi * params.mu:
        diag["wake_note"] = "chi mu < b <= 2 chi mu: wake level not pinned by theory"

    final_sup = float(traj.u[-1].max())
    if final_sup < EXTINCT_BAR:
        return RegimeReport(Regime.EXTINCTION, wake_level=final_sup, diagnostics=diag)
    if len(traj.times) < 2:
        diag["reason"] = "single snapshot"
        return RegimeReport(Regime.INDETERMINATE, diagnostics=diag)

    late = _late(traj.times, window)
    front = track_fronts(traj, level)
    right = _try_fit(front, "right", window)
    left = _try_fit(front, "left", window)
    for lvl_factor in (0.001, 0.01, 0.1):
        alt = track_fronts(traj, lvl_factor * consts.r_star / params.b)
        for side in ("right", "left"):
            f = _try_fit(alt, side, window)
            if f is not None:
                diag[f"{side}_speed@{lvl_factor:g}"] = f.speed
    span = traj.times[-1] - traj.times[0]
    eps_meas = lambda fit: 2.0 * fit.stderr + traj.grid.h / max(window * span, 1e-12)  # noqa: E731

    if env.kind is ProfileKind.BUMP:
        xi = traj.grid.x
        centre = env.center + (c - traj.frame_speed) * traj.times[late][:, None]
        in_window = np.abs(xi[None, :] - centre) <= persist_halfwidth
        window_min = float(np.min(np.where(in_window, traj.u[late], np.inf)))
        diag["comoving_window_min"] = window_min
        lab_centre = env.center + c * traj.times[-1]
        wake = float(np.interp(lab_centre - traj.frame_speed * traj.times[-1], xi, traj.u[-1]))
        if window_min > PERSIST_BAR:
            return RegimeReport(Regime.PERSIST_AROUND_SHIFT,
                                right.speed if right else None, left.speed if left else None,
                                wake, diag)
        diag["reason"] = "not extinct yet, but the comoving window is below the persistence bar"
        return RegimeReport(Regime.INDETERMINATE, wake_level=wake, diagnostics=diag)

    if not np.any(np.isfinite(front.right_front[late])) and not np.any(np.isfinite(front.left_front[late])):
        diag["reason"] = "no fronts in the late window (steady or pinned at grid ends)"
        wake = float(np.mean(traj.u[-1]))
        return RegimeReport(Regime.INDETERMINATE, wake_level=wake, diagnostics=diag)

    if right is not None:
        diag["right_stderr"] = right.stderr
    if left is not None:
        diag["left_stderr"] = left.stderr

    # shrinking occupied interval: decaying towards extinction, not there yet
    if right is not None and left is not None and left.speed > right.speed + eps_meas(left) + eps_meas(right):
        diag["reason"] = "occupied interval shrinking; not below extinction bar yet"
        return RegimeReport(Regime.INDETERMINATE, right.speed, left.speed, diagnostics=diag)

    wake = None
    lo_speed = max(c, -cs) if env.kind is ProfileKind.TANH else -cs
    try:
        wake = wake_level(traj, (0.0, 0.5 * (lo_speed + cs)), window)
    except ValueError:
        pass

    if left is None:
        diag["reason"] = "left front unavailable in the late window"
        return RegimeReport(Regime.INDETERMINATE, right.speed if right else None, None, wake, diag)

    if env.kind is ProfileKind.CONSTANT:
        return RegimeReport(Regime.SPREAD_BOTH, right.speed if right else None, left.speed, wake, diag)

    # tanh habitat: left front follows the edge (speed c) or outruns it (speed -c*)
    e = eps_meas(left)
    near_shift = abs(left.speed - c) <= e
    near_both = abs(left.speed + cs) <= e
    if near_shift and near_both and abs(c + cs) > 2 * e:
        diag["reason"] = "left-front speed straddles c and -c* within measurement error"
        return RegimeReport(Regime.INDETERMINATE, right.speed if right else None, left.speed, wake, diag)
    regime = (Regime.SPREAD_ALONG_SHIFT if abs(left.speed - c) <= abs(left.speed + cs)
              else Regime.SPREAD_BOTH)
    return RegimeReport(regime, right.speed if right else None, left.speed, wake, diag)
