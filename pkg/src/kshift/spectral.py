"""Principal eigenpairs of phi'' + c phi' + r(x) phi = lambda phi on (-L, L).

The Liouville substitution phi = exp(-c x / 2) psi turns the operator into the
self-adjoint psi'' + (r - c^2/4) psi, whose centered discretization is a
symmetric tridiagonal matrix. Its top eigenvalue is isolated by Sturm-sequence
bisection and the eigenvector recovered by shifted inverse iteration.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import solve_tridiag, sturm_count
from .environment import EnvConstants, EnvironmentProfile

logger = logging.getLogger(__name__)

__all__ = [
    "SpectralProblem",
    "SpectralResult",
    "SpectralConvergenceError",
    "LambdaInfinity",
    "GradientBoundReport",
    "principal_eig",
    "lambda_infinity",
    "check_phi_gradient_bound",
    "nu_star",
    "dense_phi_matrix",
    "central_phi_matrix",
    "gradient_bound_constant",
]

MAX_INVERSE_SWEEPS = 200
MAX_NODES = 2**22


class SpectralConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectralProblem:
    """``n`` is the number of mesh intervals on [-L, L] (spacing 2L/n)."""

    c: float
    env: EnvironmentProfile
    L: float
    n: int = 1024

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.n < 16:
            raise ValueError("n must be >= 16")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def x(self) -> np.ndarray:
        """All n+1 mesh points, Dirichlet ends included."""
        return np.linspace(-self.L, self.L, self.n + 1)


@dataclass
class SpectralResult:
    lambda_L: float
    x: np.ndarray
    phi: np.ndarray
    L: float
    residual: float
    c: float = 0.0

    @property
    def h(self) -> float:
        return self.x[1] - self.x[0]


def _symmetric_diagonals(prob: SpectralProblem):
    x = prob.x[1:-1]
    h = prob.h
    q = prob.env.frozen()(x) - 0.25 * prob.c**2
    diag = q - 2.0 / (h * h)
    off = np.full(len(x) - 1, 1.0 / (h * h))
    return x, diag, off


def _largest_eigenvalue(diag: np.ndarray, off: np.ndarray) -> float:
    n = len(diag)
    off2 = off * off
    # Rayleigh quotient with unit vectors bounds below; Gershgorin bounds above
    lo = float(diag.max())
    radius = np.zeros(n)
    radius[:-1] += np.abs(off)
    radius[1:] += np.abs(off)
    hi = float((diag + radius).max())
    scale = max(abs(lo), abs(hi), 1.0)
    while hi - lo > 4.0 * np.finfo(float).eps * scale:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if sturm_count(diag, off2, mid) == n:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _inverse_iteration(diag, off, lam):
    """Eigenvector for the top eigenvalue ``lam``.

    Shifting just above ``lam`` makes sigma I - T a positive-definite M-matrix, so
    the Thomas sweep is stable and the iterates stay entrywise positive.
    """
    n = len(diag)
    scale = max(abs(diag).max(), 1.0)
    sigma = lam + 1e-10 * scale
    lower = np.empty(n)
    upper = np.empty(n)
    lower[0] = upper[-1] = 0.0
    lower[1:] = -off
    upper[:-1] = -off
    shifted = sigma - diag
    y = np.ones(n)
    y /= np.linalg.norm(y)
    prev = math.inf
    for sweep in range(MAX_INVERSE_SWEEPS):
        z = solve_tridiag(lower, shifted, upper, y)
        z /= np.linalg.norm(z)
        change = float(np.linalg.norm(z - y))
        # stop at the tolerance, or once the change has hit its roundoff floor
        if change < 1e-12 or (change < 1e-9 and change >= prev):
            return z, sweep + 1
        prev = change
        y = z
    raise SpectralConvergenceError(
        f"inverse iteration did not converge in {MAX_INVERSE_SWEEPS} sweeps"
    )


def _tridiag_matvec(diag, off, y):
    out = diag * y
    out[:-1] += off * y[1:]
    out[1:] += off * y[:-1]
    return out


def principal_eig(prob: SpectralProblem) -> SpectralResult:
    """Top eigenvalue and positive eigenfunction (max-normalized) on (-L, L)."""
    x, diag, off = _symmetric_diagonals(prob)
    lam = _largest_eigenvalue(diag, off)
    psi, sweeps = _inverse_iteration(diag, off, lam)
    residual = float(np.abs(_tridiag_matvec(diag, off, psi) - lam * psi).max() / np.abs(psi).max())

    # phi = exp(-c x/2) psi in log space; exp(+-cL/2) overflows for long intervals
    tiny = np.finfo(float).tiny
    log_phi = np.log(np.maximum(psi, tiny)) - 0.5 * prob.c * x
    phi_in = np.where(psi > 0, np.exp(log_phi - log_phi.max()), 0.0)
    phi = np.concatenate(([0.0], phi_in, [0.0]))
    logger.debug("principal_eig L=%g n=%d lambda=%.12g sweeps=%d", prob.L, prob.n, lam, sweeps)
    return SpectralResult(lambda_L=lam, x=prob.x, phi=phi, L=prob.L, residual=residual, c=prob.c)


def dense_phi_matrix(prob: SpectralProblem) -> np.ndarray:
    """Nonsymmetric matrix of phi'' + c phi' + r phi with exponentially fitted
    neighbour weights exp(+-c h/2)/h^2, built directly in phi-variables."""
    x = prob.x[1:-1]
    h = prob.h
    n = len(x)
    r = prob.env.frozen()(x)
    a = np.diag(r - 2.0 / (h * h) - 0.25 * prob.c**2)
    up = math.exp(0.5 * prob.c * h) / (h * h)
    down = math.exp(-0.5 * prob.c * h) / (h * h)
    a += np.diag(np.full(n - 1, up), 1) + np.diag(np.full(n - 1, down), -1)
    return a


def central_phi_matrix(prob: SpectralProblem) -> np.ndarray:
    """Plain centered discretization of phi'' + c phi' + r phi (no symmetrization)."""
    x = prob.x[1:-1]
    h = prob.h
    n = len(x)
    r = prob.env.frozen()(x)
    a = np.diag(r - 2.0 / (h * h))
    a += np.diag(np.full(n - 1, 1.0 / (h * h) + prob.c / (2 * h)), 1)
    a += np.diag(np.full(n - 1, 1.0 / (h * h) - prob.c / (2 * h)), -1)
    return a


@dataclass
class LambdaInfinity:
    lambda_inf: float
    L_used: float
    history: list[tuple[float, float]] = field(default_factory=list)
    result: SpectralResult | None = None


def lambda_infinity(c: float, env: EnvironmentProfile, tol: float = 1e-4, *,
                    h: float | None = None, L0: float | None = None,
                    max_L: float | None = None) -> LambdaInfinity:
    """Double L from ``L0 = 10 width`` until successive eigenvalues differ by < tol.

    Raises :class:`SpectralConvergenceError` once L would pass ``max_L``
    (default ``1e6 width``) or the mesh would exceed ``MAX_NODES`` points.

    The mesh spacing is held fixed so each mesh is nested in the next; by
    Cauchy interlacing the discrete eigenvalues are then nondecreasing in L.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    L = 10.0 * env.width if L0 is None else float(L0)
    target_h = min(0.05, env.width / 20.0) if h is None else h
    n = 2 * max(8, math.ceil(L / target_h))
    L_max = 1e6 * env.width if max_L is None else float(max_L)

    prev = principal_eig(SpectralProblem(c, env, L, n))
    history = [(L, prev.lambda_L)]
    while True:
        L, n = 2.0 * L, 2 * n
        if L > L_max or n > MAX_NODES:
            raise SpectralConvergenceError(
                f"lambda_L not converged to {tol:g} by L = {L / 2:g} (last change "
                f"{history[-1][1] - history[-2][1] if len(history) > 1 else math.nan:.3e})"
            )
        cur = principal_eig(SpectralProblem(c, env, L, n))
        history.append((L, cur.lambda_L))
        slack = 64.0 * np.finfo(float).eps * (4.0 / (2.0 * L / n) ** 2)
        if cur.lambda_L < prev.lambda_L - slack:
            raise AssertionError(
                f"lambda_L decreased on doubling: {prev.lambda_L!r} -> {cur.lambda_L!r} at L={L}"
            )
        if abs(cur.lambda_L - prev.lambda_L) < tol:
            return LambdaInfinity(cur.lambda_L, L, history, cur)
        prev = cur


@dataclass(frozen=True)
class GradientBoundReport:
    max_violation: float
    bound_constant: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def gradient_bound_constant(c: float, r_star: float) -> float:
    return 0.5 * (math.sqrt(8.0 * r_star + c * c) + abs(c))


def check_phi_gradient_bound(result: SpectralResult, c: float, env: EnvConstants,
                             tol: float | None = None) -> GradientBoundReport:
    """Check |phi'| <= (sqrt(8 r* + c^2) + |c|)/2 phi on the inner half |x| <= L/2."""
    k = gradient_bound_constant(c, env.r_star)
    dphi = np.gradient(result.phi, result.h)
    inner = np.abs(result.x) <= 0.5 * result.L
    excess = np.abs(dphi[inner]) - k * result.phi[inner]
    if tol is None:
        tol = 10.0 * result.h
    return GradientBoundReport(float(excess.max()), k, tol)


def nu_star(c: float, env: EnvConstants | float) -> float:
    """Attractant-decay threshold (sqrt(8 r* + c^2) + |c|)^2 / 4."""
    r_star = env.r_star if isinstance(env, EnvConstants) else float(env)
    return gradient_bound_constant(c, r_star) ** 2
