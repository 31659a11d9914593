"""Keller-Segel chemotaxis with a shifting growth profile, in one space dimension."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .analysis import Regime, classify, predict_regime, track_fronts, fit_speed, wake_level, check_h1
from .chemo import ChemoParams, Grid, solve_v_kernel, solve_v_tridiag, check_psi_bound
from .environment import EnvironmentProfile, ProfileKind, constants
from .evolution import Frame, InitialKind, SimConfig, Trajectory, run
from .spectral import SpectralProblem, lambda_infinity, principal_eig

__all__ = [
    "__version__",
    "BACKEND",
    "Regime",
    "classify",
    "predict_regime",
    "track_fronts",
    "fit_speed",
    "wake_level",
    "check_h1",
    "ChemoParams",
    "Grid",
    "solve_v_kernel",
    "solve_v_tridiag",
    "check_psi_bound",
    "EnvironmentProfile",
    "ProfileKind",
    "constants",
    "Frame",
    "InitialKind",
    "SimConfig",
    "Trajectory",
    "run",
    "SpectralProblem",
    "lambda_infinity",
    "principal_eig",
]
