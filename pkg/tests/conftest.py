import numpy as np
import pytest

from kshift import ChemoParams, EnvironmentProfile, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def chemo():
    return ChemoParams(chi=0.2, nu=1.0, mu=1.0, b=1.0)


@pytest.fixture
def tanh_env():
    return EnvironmentProfile.tanh(-1.0, 1.0, shift_speed=0.5)


@pytest.fixture
def small_grid():
    return Grid.from_spacing(-20.0, 20.0, 0.1)
