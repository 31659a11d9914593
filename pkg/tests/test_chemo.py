import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kshift.chemo import (
    ChemoParams,
    Grid,
    check_psi_bound,
    green_kernel,
    green_kernel_quadrature,
    gradient_v,
    solve_v_kernel,
    solve_v_tridiag,
    v_residual,
    validate_green_kernel,
)


@pytest.mark.parametrize("nu", [0.25, 1.0, 4.0])
@pytest.mark.parametrize("z", [0.0, 0.5, 1.0, 2.0, -1.5])
def test_closed_kernel_matches_quadrature(z, nu):
    assert green_kernel_quadrature(z, nu) == pytest.approx(float(green_kernel(z, nu)), abs=1e-12)


def test_validate_green_kernel_reports_tiny_gap():
    assert validate_green_kernel() < 1e-12


def test_kernel_sum_matches_dense_double_loop(rng):
    grid = Grid(-6.0, 6.0, 241)
    params = ChemoParams(0.0, 2.0, 1.3, 1.0)
    u = rng.random(grid.n_nodes)
    w = grid.trapezoid_weights()
    dense = params.mu * green_kernel(grid.x[:, None] - grid.x[None, :], params.nu) @ (w * u)
    np.testing.assert_allclose(solve_v_kernel(u, grid, params), dense, rtol=1e-12, atol=0)


def _sech_case(h):
    # v = sech x solves v'' - v + 2 sech^3 x = 0 on the line (nu = mu = 1)
    grid = Grid.from_spacing(-30.0, 30.0, h)
    return grid, 2.0 / np.cosh(grid.x) ** 3, 1.0 / np.cosh(grid.x)


def test_manufactured_solution_both_solvers():
    params = ChemoParams(0.0, 1.0, 1.0, 1.0)
    errs = []
    for h in (0.04, 0.02, 0.01):
        grid, u, exact = _sech_case(h)
        errs.append(np.abs(solve_v_tridiag(u, grid, params) - exact).max())
        assert np.abs(solve_v_kernel(u, grid, params) - exact).max() < 0.2 * h * h
    assert errs[-1] < 1e-5
    # second order for the finite-difference solve
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


def test_neumann_solve_of_constant_data_is_exact():
    grid = Grid(-5.0, 5.0, 101)
    params = ChemoParams(0.0, 3.0, 2.0, 1.0)
    v = solve_v_tridiag(np.full(grid.n_nodes, 0.6), grid, params, bc=("neumann", "neumann"))
    np.testing.assert_allclose(v, 0.6 * 2.0 / 3.0, rtol=1e-13)


def test_tridiag_satisfies_discrete_equation(rng):
    grid = Grid(-10.0, 10.0, 501)
    params = ChemoParams(0.0, 1.7, 0.8, 1.0)
    u = rng.random(grid.n_nodes)
    v = solve_v_tridiag(u, grid, params)
    assert v_residual(v, u, grid, params) < 1e-9


def test_unknown_boundary_rejected(small_grid, chemo):
    with pytest.raises(ValueError):
        solve_v_tridiag(np.zeros(small_grid.n_nodes), small_grid, chemo, bc=("robin", "dirichlet"))


def test_negative_u_rejected(small_grid, chemo):
    u = np.zeros(small_grid.n_nodes)
    u[3] = -1e-3
    for solver in (solve_v_kernel, solve_v_tridiag):
        with pytest.raises(ValueError):
            solver(u, small_grid, chemo)


def test_roundoff_negatives_are_tolerated(small_grid, chemo):
    u = np.zeros(small_grid.n_nodes)
    u[3] = -1e-14
    assert np.all(solve_v_kernel(u, small_grid, chemo) == 0.0)


def test_linearity_and_order(rng, small_grid, chemo):
    a, b = rng.random(small_grid.n_nodes), rng.random(small_grid.n_nodes)
    for solver in (solve_v_kernel, solve_v_tridiag):
        va, vb = solver(a, small_grid, chemo), solver(b, small_grid, chemo)
        np.testing.assert_allclose(solver(2 * a + b, small_grid, chemo), 2 * va + vb, rtol=1e-12)
        assert np.all(solver(a + b, small_grid, chemo) >= va)


def test_gradient_bound_on_manufactured_solution():
    grid, u, _ = _sech_case(0.02)
    rep = check_psi_bound(u, grid, ChemoParams(0.0, 1.0, 1.0, 1.0))
    assert rep.passed


def test_gradient_of_linear_is_exact():
    grid = Grid(0.0, 1.0, 11)
    np.testing.assert_allclose(gradient_v(3.0 * grid.x + 1.0, grid), 3.0)


nonneg = arrays(np.float64, 201, elements=st.floats(0.0, 5.0))


@settings(max_examples=40, deadline=None)
@given(nonneg, st.floats(0.25, 4.0), st.floats(0.2, 3.0))
def test_solutions_nonnegative_and_gradient_bounded(u, nu, mu):
    grid = Grid(-10.0, 10.0, 201)
    u = u.copy()
    u[:20] = u[-20:] = 0.0
    params = ChemoParams(0.0, nu, mu, 1.0)
    assert np.all(solve_v_kernel(u, grid, params) >= 0)
    v = solve_v_tridiag(u, grid, params)
    assert np.all(v >= -1e-14)
    assert check_psi_bound(u, grid, params, v=v).passed


@pytest.mark.parametrize("kw", [dict(chi=-0.1), dict(nu=0.0), dict(mu=-1.0), dict(b=0.0)])
def test_params_validation(kw):
    base = dict(chi=0.2, nu=1.0, mu=1.0, b=1.0)
    with pytest.raises(ValueError):
        ChemoParams(**{**base, **kw})


def test_grid_validation_and_spacing():
    g = Grid.from_spacing(-1.0, 1.0, 0.25)
    assert g.n_nodes == 9 and g.h == pytest.approx(0.25)
    assert g.trapezoid_weights().sum() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        g.x[0] = 5.0
    for bad in ((1.0, 0.0, 10), (0.0, 1.0, 2)):
        with pytest.raises(ValueError):
            Grid(*bad)
