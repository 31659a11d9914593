# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Mirrors :mod:`kshift._kernels_py` exactly in signature."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def solve_tridiag(const double[::1] lower, const double[::1] diag,
                  const double[::1] upper, const double[::1] rhs):
    """Thomas algorithm. ``lower[0]`` and ``upper[n-1]`` are ignored."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double m
    out = np.empty(n, dtype=np.float64)
    cp = np.empty(n, dtype=np.float64)
    cdef double[::1] x = out
    cdef double[::1] c = cp
    if n == 0:
        return out
    c[0] = upper[0] / diag[0] if n > 1 else 0.0
    x[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * c[i - 1]
        if i < n - 1:
            c[i] = upper[i] / m
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / m
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - c[i] * x[i + 1]
    return out


def upwind_step(const double[::1] u, const double[::1] v, const double[::1] r,
                double h, double dt, double chi, double b, double drift,
                double[::1] out):
    """One explicit Euler update of the conservative flux form; returns clipped mass."""
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef double w, g, f_left, f_right, div, clipped = 0.0
    cdef double inv_h = 1.0 / h
    cdef double inv_half = 2.0 / h

    f_left = 0.0
    for i in range(n):
        if i < n - 1:
            w = chi * (v[i + 1] - v[i]) * inv_h + drift
            if w > 0.0:
                g = w * u[i]
            else:
                g = w * u[i + 1]
            f_right = (u[i + 1] - u[i]) * inv_h - g
        else:
            f_right = 0.0
        if i == 0:
            div = f_right * inv_half
        elif i == n - 1:
            div = -f_left * inv_half
        else:
            div = (f_right - f_left) * inv_h
        out[i] = u[i] + dt * (div + u[i] * (r[i] - b * u[i]))
        if out[i] < 0.0:
            clipped -= out[i]
            out[i] = 0.0
        f_left = f_right
    return clipped * h


def sturm_count(const double[::1] diag, const double[::1] off2, double sigma):
    """Number of eigenvalues strictly below ``sigma`` (LDL^T inertia)."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef int count = 0
    cdef double d, pivmin = 1e-300
    d = diag[0] - sigma
    if fabs(d) < pivmin:
        d = -pivmin
    if d < 0.0:
        count += 1
    for i in range(1, n):
        d = (diag[i] - sigma) - off2[i - 1] / d
        if fabs(d) < pivmin:
            d = -pivmin
        if d < 0.0:
            count += 1
    return count
