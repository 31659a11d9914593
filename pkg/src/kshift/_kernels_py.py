"""Pure-Python/NumPy implementations of the hot kernels.

Used when the compiled ``kshift._kernels`` extension is unavailable, or when
``KSHIFT_PURE=1`` is set. Signatures match the Cython module one-for-one.
"""

import numpy as np
from scipy.linalg import solve_banded


def solve_tridiag(lower, diag, upper, rhs):
    """Solve a tridiagonal system. ``lower[0]`` and ``upper[-1]`` are ignored."""
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs, check_finite=False)


def upwind_step(u, v, r, h, dt, chi, b, drift, out):
    w = chi * np.diff(v) / h + drift
    g = np.maximum(w, 0.0) * u[:-1] + np.minimum(w, 0.0) * u[1:]
    flux = np.diff(u) / h - g

    div = np.empty_like(u)
    div[1:-1] = (flux[1:] - flux[:-1]) / h
    div[0] = flux[0] * (2.0 / h)
    div[-1] = -flux[-1] * (2.0 / h)

    out[:] = u + dt * (div + u * (r - b * u))
    neg = out < 0.0
    clipped = -out[neg].sum()
    out[neg] = 0.0
    return clipped * h


def sturm_count(diag, off2, sigma):
    pivmin = 1e-300
    count = 0
    d = 1.0
    first = True
    for a, e2 in zip(diag.tolist(), [0.0] + off2.tolist()):
        d = (a - sigma) if first else (a - sigma) - e2 / d
        first = False
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            count += 1
    return count
