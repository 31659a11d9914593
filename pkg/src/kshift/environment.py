"""Shifting growth-rate profiles r(x - ct) and their derived constants."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProfileKind",
    "EnvironmentProfile",
    "EnvConstants",
    "evaluate",
    "constants",
    "sample",
]


class ProfileKind(str, enum.Enum):
    CONSTANT = "constant"
    TANH = "tanh"  # favorable half-line, unfavorable on the other side
    BUMP = "bump"  # favorable patch surrounded by unfavorable habitat


@dataclass(frozen=True)
class EnvironmentProfile:
    """Immutable description of a growth-rate profile translating at ``shift_speed``.

    For ``CONSTANT`` the value is ``r_plus`` (``r_minus`` is forced equal).
    ``r_peak`` is only read for ``BUMP``.
    """

    kind: ProfileKind
    r_minus: float
    r_plus: float
    r_peak: float = 0.0
    width: float = 1.0
    center: float = 0.0
    shift_speed: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ProfileKind(self.kind))
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")
        for name in ("r_minus", "r_plus", "r_peak", "center", "shift_speed"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.kind is ProfileKind.CONSTANT:
            object.__setattr__(self, "r_minus", self.r_plus)
        elif self.kind is ProfileKind.TANH:
            if not self.r_minus < 0 < self.r_plus:
                raise ValueError("tanh profile needs r_minus < 0 < r_plus")
        else:
            if not (self.r_minus < 0 and self.r_plus < 0 and self.r_peak > 0):
                raise ValueError("bump profile needs r_minus, r_plus < 0 < r_peak")

    @classmethod
    def constant(cls, value: float, shift_speed: float = 0.0) -> EnvironmentProfile:
        return cls(ProfileKind.CONSTANT, value, value, shift_speed=shift_speed)

    @classmethod
    def tanh(cls, r_minus: float, r_plus: float, *, width: float = 1.0,
             center: float = 0.0, shift_speed: float = 0.0) -> EnvironmentProfile:
        return cls(ProfileKind.TANH, r_minus, r_plus, width=width, center=center,
                   shift_speed=shift_speed)

    @classmethod
    def bump(cls, r_minus: float, r_plus: float, r_peak: float, *, width: float = 1.0,
             center: float = 0.0, shift_speed: float = 0.0) -> EnvironmentProfile:
        return cls(ProfileKind.BUMP, r_minus, r_plus, r_peak=r_peak, width=width,
                   center=center, shift_speed=shift_speed)

    def frozen(self) -> EnvironmentProfile:
        """Same profile with zero shift speed (the t=0 snapshot as a static field)."""
        return EnvironmentProfile(self.kind, self.r_minus, self.r_plus, self.r_peak,
                                  self.width, self.center, 0.0)

    def __call__(self, xi):
        """Evaluate the unshifted profile at ``xi`` (scalar or array)."""
        xi = np.asarray(xi, dtype=float)
        if self.kind is ProfileKind.CONSTANT:
            return np.full_like(xi, self.r_plus)
        s = (xi - self.center) / self.width
        step = 0.5 * (1.0 + np.tanh(s))
        ramp = self.r_minus + (self.r_plus - self.r_minus) * step
        if self.kind is ProfileKind.TANH:
            return ramp
        # convex blend of the tilted floor and the peak keeps r >= min(r_minus, r_plus)
        g = np.exp(-(s * s))
        return ramp * (1.0 - g) + self.r_peak * g


@dataclass(frozen=True)
class EnvConstants:
    r_star_low: float
    r_star: float
    c_star: float


def evaluate(profile: EnvironmentProfile, x, t):
    """r(x - c t) for scalar or array ``x``."""
    out = profile(np.asarray(x, dtype=float) - profile.shift_speed * t)
    return float(out) if out.ndim == 0 else out


def constants(profile: EnvironmentProfile) -> EnvConstants:
    """Infimum, supremum and the spreading speed 2*sqrt(sup r)."""
    if profile.kind is ProfileKind.BUMP:
        r_star, r_low = profile.r_peak, min(profile.r_minus, profile.r_plus)
    else:
        r_star, r_low = profile.r_plus, profile.r_minus
    if not r_star > 0:
        raise ValueError(f"sup r must be positive, got {r_star}")
    return EnvConstants(r_star_low=r_low, r_star=r_star, c_star=2.0 * math.sqrt(r_star))


def sample(profile: EnvironmentProfile, grid, t: float = 0.0) -> np.ndarray:
    """Node-wise r(x_i - c t) on ``grid``."""
    return profile(grid.x - profile.shift_speed * t)
