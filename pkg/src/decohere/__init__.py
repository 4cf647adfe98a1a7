"""Entropy and decoherence toolkit.

Submodules
----------
entropy
    Density-matrix entropies, thermal identities and correlation kernels.
densmat
    Finite-dimensional unitary evolution and bipartite reductions.
numerics
    Adaptive integrator, Gaussian covariance tools and spectral estimators.
brownian
    Particle coupled to an oscillator bath, evolved as a global Gaussian state.
tdhf
    Gaussian variational dynamics of a coupled system and environment.
chaos
    Sections, spectra and Lyapunov exponents of the system-sector flow.
"""

from .brownian import BathModel, BathSpec, ParticleInit
from .densmat import entropy_equality_check, partial_trace, unitary_evolve
from .entropy import (Spectrum, compute_y, dof_entropy_ratio, entropy_from_modes,
                      linear_entropy, thermal_entropy_via_free_energy, von_neumann_entropy)
from .errors import (DegenerateCorrelationError, DomainError, InvalidInputError,
                     NonPhysicalCorrelationError, PositivityError, UndefinedTimescaleError)
from .tdhf import CouplingSpec, PotentialSpec, TdhfModel, TdhfState

__version__ = "0.1.0"

__all__ = [
    "BathModel", "BathSpec", "CouplingSpec", "DegenerateCorrelationError", "DomainError",
    "InvalidInputError", "NonPhysicalCorrelationError", "ParticleInit", "PositivityError",
    "PotentialSpec", "Spectrum", "TdhfModel", "TdhfState", "UndefinedTimescaleError",
    "compute_y", "dof_entropy_ratio", "entropy_equality_check", "entropy_from_modes",
    "linear_entropy", "partial_trace", "thermal_entropy_via_free_energy", "unitary_evolve",
    "von_neumann_entropy",
]
