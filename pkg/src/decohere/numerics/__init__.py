"""Shared numerical services."""

from .gaussian import (gaussian_entropy, gaussian_purity, is_physical,
                       linear_flow, mode_entropy, random_symplectic,
                       reduce_covariance, symplectic_defect,
                       symplectic_eigenvalues, symplectic_form)
from .ode import (IntegrationError, OdeProblem, Trajectory, integrate, jit_rhs,
                  locate_events, sign_flips)
from .spectral import dominant_lines, power_spectrum, spectral_entropy

__all__ = [
    "IntegrationError", "OdeProblem", "Trajectory", "dominant_lines",
    "gaussian_entropy", "gaussian_purity", "integrate", "is_physical",
    "jit_rhs", "linear_flow", "locate_events", "mode_entropy",
    "power_spectrum", "random_symplectic", "reduce_covariance",
    "sign_flips", "spectral_entropy", "symplectic_defect",
    "symplectic_eigenvalues", "symplectic_form",
]
