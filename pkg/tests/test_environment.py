import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kshift.environment import EnvironmentProfile, ProfileKind, constants, evaluate, sample
from kshift.chemo import Grid


def test_constant_profile_is_flat():
    env = EnvironmentProfile.constant(0.7, shift_speed=3.0)
    assert np.all(env(np.linspace(-50, 50, 11)) == 0.7)
    assert env.r_minus == env.r_plus == 0.7
    assert constants(env).c_star == pytest.approx(2 * math.sqrt(0.7))


def test_tanh_limits_and_midpoint():
    env = EnvironmentProfile.tanh(-2.0, 1.5, width=0.5, center=3.0)
    assert env(-1e3) == pytest.approx(-2.0)
    assert env(1e3) == pytest.approx(1.5)
    assert env(3.0) == pytest.approx(-0.25)
    k = constants(env)
    assert (k.r_star_low, k.r_star, k.c_star) == (-2.0, 1.5, pytest.approx(2 * math.sqrt(1.5)))


def test_bump_peak_and_floor():
    env = EnvironmentProfile.bump(-1.0, -0.5, 2.0, width=2.0, center=1.0)
    assert env(1.0) == pytest.approx(2.0)
    assert env(-1e3) == pytest.approx(-1.0)
    assert env(1e3) == pytest.approx(-0.5)
    x = np.linspace(-30, 30, 6001)
    assert env(x).max() <= 2.0 + 1e-12
    assert env(x).min() >= -1.0 - 1e-12


@given(st.floats(-5, 5), st.floats(0, 10), st.floats(-3, 3))
def test_shift_is_translation(x, t, c):
    env = EnvironmentProfile.tanh(-1.0, 1.0, shift_speed=c)
    assert evaluate(env, x, t) == pytest.approx(float(env(x - c * t)))


def test_sample_matches_evaluate():
    env = EnvironmentProfile.bump(-1, -1, 1, shift_speed=0.5)
    grid = Grid(-10, 10, 101)
    np.testing.assert_array_equal(sample(env, grid, 2.0), evaluate(env, grid.x, 2.0))


def test_frozen_drops_shift():
    env = EnvironmentProfile.tanh(-1.0, 1.0, shift_speed=2.0)
    fr = env.frozen()
    assert fr.shift_speed == 0.0 and fr.kind is ProfileKind.TANH
    assert evaluate(fr, 1.0, 10.0) == pytest.approx(float(env(1.0)))


@pytest.mark.parametrize("kwargs", [
    dict(kind="tanh", r_minus=0.5, r_plus=1.0),
    dict(kind="tanh", r_minus=-1.0, r_plus=-0.1),
    dict(kind="bump", r_minus=-1.0, r_plus=-1.0, r_peak=0.0),
    dict(kind="bump", r_minus=0.1, r_plus=-1.0, r_peak=1.0),
    dict(kind="tanh", r_minus=-1.0, r_plus=1.0, width=0.0),
    dict(kind="tanh", r_minus=-1.0, r_plus=1.0, shift_speed=math.inf),
])
def test_invalid_profiles_rejected(kwargs):
    with pytest.raises(ValueError):
        EnvironmentProfile(**kwargs)


def test_nonpositive_sup_rejected():
    with pytest.raises(ValueError):
        constants(EnvironmentProfile.constant(-0.5))
