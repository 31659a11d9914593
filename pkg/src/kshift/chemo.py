"""Elliptic chemo-attractant equation 0 = v'' - nu v + mu u on a 1-D grid.

Two independent routes are provided: a trapezoid sum against the free-space
Green kernel ``mu exp(-sqrt(nu)|z|) / (2 sqrt(nu))`` and a second-order
finite-difference tridiagonal solve with decay (Robin) ends.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.signal import lfilter

from ._backend import solve_tridiag

__all__ = [
    "Grid",
    "ChemoParams",
    "PsiBoundReport",
    "green_kernel",
    "green_kernel_quadrature",
    "validate_green_kernel",
    "solve_v_kernel",
    "solve_v_tridiag",
    "gradient_v",
    "check_psi_bound",
]

NEGATIVE_U_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_nodes: int
    x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 3:
            raise ValueError(f"n_nodes must be an integer >= 3, got {self.n_nodes}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        object.__setattr__(self, "n_nodes", int(self.n_nodes))
        x = np.linspace(self.x_min, self.x_max, self.n_nodes)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @classmethod
    def from_spacing(cls, x_min: float, x_max: float, h: float) -> Grid:
        n = int(round((x_max - x_min) / h)) + 1
        return cls(x_min, x_max, n)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_nodes - 1)

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n_nodes, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


@dataclass(frozen=True)
class ChemoParams:
    """Chemotactic sensitivity ``chi``, attractant decay ``nu``, production ``mu``,
    and logistic self-limitation ``b``."""

    chi: float
    nu: float
    mu: float
    b: float

    def __post_init__(self):
        if not self.chi >= 0:
            raise ValueError("chi must be >= 0")
        for name in ("nu", "mu", "b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


def green_kernel(z, nu: float):
    """Closed form exp(-sqrt(nu)|z|) / (2 sqrt(nu)) of the resolvent kernel."""
    s = math.sqrt(nu)
    return np.exp(-s * np.abs(z)) / (2.0 * s)


def green_kernel_quadrature(z: float, nu: float) -> float:
    """Time integral of the damped heat kernel, int_0^inf e^{-nu s} G_s(z) ds.

    Substituting s = sigma^2 removes the 1/sqrt(s) endpoint singularity.
    """
    z2 = z * z

    def integrand(sigma):
        if sigma == 0.0:
            return 1.0 / math.sqrt(math.pi) if z2 == 0.0 else 0.0
        return math.exp(-nu * sigma * sigma - z2 / (4.0 * sigma * sigma)) / math.sqrt(math.pi)

    val, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


@functools.cache
def validate_green_kernel(tol: float = 1e-8) -> float:
    """Check the closed kernel against quadrature; returns the max discrepancy."""
    worst = 0.0
    for nu in (0.25, 1.0, 4.0):
        for z in (0.0, 0.5, 1.0, 2.0):
            worst = max(worst, abs(green_kernel_quadrature(z, nu) - float(green_kernel(z, nu))))
    if worst > tol:
        raise RuntimeError(f"Green kernel closed form disagrees with quadrature by {worst:.3e}")
    return worst


def _checked_u(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("u contains non-finite entries")
    if u.size and u.min() < -NEGATIVE_U_TOL:
        raise ValueError(f"u must be nonnegative (min {u.min():.3e})")
    return np.maximum(u, 0.0)


def solve_v_kernel(u, grid: Grid, params: ChemoParams) -> np.ndarray:
    """Trapezoid sum of the Green kernel against ``u`` (zero outside the grid).

    v_i = sum_j w_j mu/(2 sqrt nu) exp(-sqrt(nu)|x_i - x_j|) u_j. On a uniform
    grid the exponential factorizes, so the sum is evaluated as two one-sided
    geometric recursions in O(n); every term is nonnegative.
    """
    validate_green_kernel()
    u = _checked_u(u)
    s = math.sqrt(params.nu)
    rho = math.exp(-s * grid.h)
    wu = grid.trapezoid_weights() * u
    left = lfilter([1.0], [1.0, -rho], wu)
    right = lfilter([1.0], [1.0, -rho], wu[::-1])[::-1]
    return params.mu / (2.0 * s) * (left + right - wu)


def _v_matrix(grid: Grid, nu: float, bc: tuple[str, str]):
    n, h = grid.n_nodes, grid.h
    lower = np.full(n, -1.0)
    upper = np.full(n, -1.0)
    diag = np.full(n, 2.0 + nu * h * h)
    lower[0] = upper[-1] = 0.0
    # ghost node eliminated: Robin v' = +-sqrt(nu) v, or Neumann v' = 0
    upper[0] = lower[-1] = -2.0
    robin = 2.0 * h * math.sqrt(nu)
    for end, kind in zip((0, -1), bc):
        if kind == "robin":
            diag[end] += robin
        elif kind != "neumann":
            raise ValueError(f"unknown boundary kind {kind!r}")
    return lower, diag, upper


def solve_v_tridiag(u, grid: Grid, params: ChemoParams,
                    bc: tuple[str, str] = ("robin", "robin")) -> np.ndarray:
    """Centered second-order solve of v'' - nu v + mu u = 0.

    ``bc`` picks the end conditions: ``"robin"`` imposes outward decay
    v' n = -sqrt(nu) v, matching the free-space kernel when u vanishes near the
    end; ``"neumann"`` is the even reflection, for data that stays positive
    past the end.
    """
    u = _checked_u(u)
    lower, diag, upper = _v_matrix(grid, params.nu, bc)
    rhs = params.mu * grid.h * grid.h * u
    v = solve_tridiag(lower, diag, upper, rhs)
    if not np.all(np.isfinite(v)):
        raise RuntimeError("tridiagonal v-solve produced non-finite values")
    return v


def v_residual(v, u, grid: Grid, params: ChemoParams) -> float:
    """Max interior residual of the discrete equation."""
    h = grid.h
    vxx = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    return float(np.max(np.abs(vxx - params.nu * v[1:-1] + params.mu * np.asarray(u)[1:-1])))


def gradient_v(v, grid: Grid) -> np.ndarray:
    """Centered differences inside, one-sided first order at the ends."""
    return np.gradient(np.asarray(v, dtype=float), grid.h, edge_order=1)


@dataclass(frozen=True)
class PsiBoundReport:
    max_violation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def check_psi_bound(u, grid: Grid, params: ChemoParams, v=None,
                    bc: tuple[str, str] = ("robin", "robin")) -> PsiBoundReport:
    """Max over nodes of |v_x| - sqrt(nu) v, against tolerance 10 h ||v||_inf."""
    if v is None:
        v = solve_v_tridiag(u, grid, params, bc)
    vx = gradient_v(v, grid)
    excess = np.abs(vx) - math.sqrt(params.nu) * v
    return PsiBoundReport(float(excess.max()), 10.0 * grid.h * float(np.max(np.abs(v))))
