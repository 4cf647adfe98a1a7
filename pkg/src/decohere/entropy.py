"""Entropy kernels: density-matrix, thermal and correlation entropies.

All functions are pure. Entropies are in nats; ``0 ln 0`` is taken as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import xlogy

from .errors import (DomainError, InvalidInputError,
                     NonPhysicalCorrelationError, UndefinedTimescaleError)

__all__ = [
    "CorrelationBlock",
    "Spectrum",
    "compute_y",
    "dof_entropy_ratio",
    "entropy_from_modes",
    "entropy_timescale",
    "linear_entropy",
    "local_timescale",
    "partition_function",
    "pointer_width",
    "thermal_entropy_via_free_energy",
    "thermal_state",
    "validate_density_matrix",
    "von_neumann_entropy",
]

DM_TOL = 1e-12
# eigenvalues below this are PSD round-off and are dropped before the log
EIG_CLAMP = 1e-14


def validate_density_matrix(rho, tol: float = DM_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array after checking the density-matrix
    invariants (square, Hermitian, unit trace, positive semidefinite).

    Raises
    ------
    InvalidInputError
        Naming the first violated invariant.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise InvalidInputError("density matrix must be square (shape)")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidInputError("density matrix is not Hermitian (hermiticity)")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise InvalidInputError(f"density matrix trace is {tr.real!r}, not 1 (trace)")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise InvalidInputError("density matrix has negative eigenvalues (positivity)")
    return rho


def _eigenvalues(rho) -> np.ndarray:
    w = np.linalg.eigvalsh(validate_density_matrix(rho))
    return np.where(w < EIG_CLAMP, 0.0, w)


def von_neumann_entropy(rho) -> float:
    """``-Tr rho ln rho`` from the eigenvalues of ``rho``.

    >>> round(von_neumann_entropy(np.diag([0.5, 0.5])), 12)
    0.693147180560
    """
    w = _eigenvalues(rho)
    return float(-np.sum(xlogy(w, w))) + 0.0


def linear_entropy(rho) -> float:
    """``1 - Tr rho^2``, a lower bound of the von Neumann entropy."""
    rho = validate_density_matrix(rho)
    return float(1.0 - np.real(np.sum(rho * rho.T)))


@dataclass(frozen=True)
class Spectrum:
    """Energy levels (ascending) with integer degeneracies."""

    energies: np.ndarray
    degeneracies: Optional[np.ndarray] = None

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.energies, dtype=float))
        if e.ndim != 1 or e.size < 1 or not np.all(np.isfinite(e)):
            raise InvalidInputError("spectrum needs at least one finite energy")
        if np.any(np.diff(e) < 0):
            raise InvalidInputError("energies must be sorted ascending")
        if self.degeneracies is None:
            g = np.ones(e.size, dtype=int)
        else:
            g = np.atleast_1d(np.asarray(self.degeneracies))
            if g.shape != e.shape or np.any(g < 1) or np.any(g != np.round(g)):
                raise InvalidInputError("degeneracies must be positive integers")
            g = g.astype(int)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "degeneracies", g)

    @property
    def dim(self) -> int:
        return int(self.degeneracies.sum())


SpectrumLike = Union[Spectrum, Sequence[float], np.ndarray]


def _as_spectrum(spec: SpectrumLike) -> Spectrum:
    return spec if isinstance(spec, Spectrum) else Spectrum(np.sort(np.asarray(spec, dtype=float)))


def _check_temperature(T):
    if not (np.isfinite(T) and T > 0):
        raise DomainError(f"temperature must be positive, got {T!r}")


def _log_z(spec: Spectrum, T: float) -> float:
    # shifted by the ground energy so low temperatures do not underflow
    e0 = spec.energies[0]
    x = -(spec.energies - e0) / T
    return -e0 / T + np.log(np.sum(spec.degeneracies * np.exp(x)))


def partition_function(spec: SpectrumLike, T: float) -> float:
    """``Z = sum_n g_n exp(-E_n / T)``."""
    spec = _as_spectrum(spec)
    _check_temperature(T)
    return float(np.exp(_log_z(spec, T)))


def thermal_state(spec: SpectrumLike, T: float) -> np.ndarray:
    """Diagonal Gibbs density matrix ``exp(-H/T)/Z``.

    Degenerate levels are expanded, so the matrix dimension is the total
    degeneracy.
    """
    spec = _as_spectrum(spec)
    _check_temperature(T)
    e = np.repeat(spec.energies, spec.degeneracies)
    w = np.exp(-(e - e[0]) / T)
    return np.diag(w / w.sum()).astype(complex)


def thermal_entropy_via_free_energy(spec: SpectrumLike, T: float,
                                    dT: Optional[float] = None) -> float:
    """Entropy as ``d(T ln Z)/dT``, by a central difference of step ``dT``.

    ``dT`` defaults to ``1e-4 * T``.
    """
    spec = _as_spectrum(spec)
    _check_temperature(T)
    if dT is None:
        dT = 1e-4 * T
    if not (0 < dT < T):
        raise DomainError(f"need 0 < dT < T, got dT={dT!r}, T={T!r}")
    e0 = spec.energies[0]

    def t_log_z_shifted(temp):
        # T ln Z + E_0; the constant drops out of the difference exactly
        return temp * (_log_z(spec, temp) + e0 / temp)

    return float((t_log_z_shifted(T + dT) - t_log_z_shifted(T - dT)) / (2 * dT))


def _ab(g1, g2, g12, s12):
    p = 0.5 * g1 * g2
    a = 1.0 + p * (s12 ** 2 - g12 ** 2)
    b = p * (s12 ** 2 + g12 ** 2)
    return a, b


def compute_y(g1: float, g2: float, g12: float, s12: float) -> float:
    """Eigenvalue ratio ``Y = B / (A + sqrt(A^2 - B^2))`` of the reduced
    Gaussian density matrix for one mode.

    ``A = 1 + g1 g2 (s12^2 - g12^2)/2`` and ``B = g1 g2 (s12^2 + g12^2)/2``.
    The reduced spectrum is geometric, ``(1 - Y) Y^n``.

    Raises
    ------
    NonPhysicalCorrelationError
        If ``1 - g1 g2 g12^2 <= 0`` (the two-field Gaussian is not
        normalisable, equivalently ``A^2 <= B^2``).
    """
    if not (g1 > 0 and g2 > 0):
        raise InvalidInputError("widths g1, g2 must be positive")
    a, b = _ab(g1, g2, g12, s12)
    a_minus_b = 1.0 - g1 * g2 * g12 ** 2
    a_plus_b = 1.0 + g1 * g2 * s12 ** 2
    if a_minus_b <= 0:
        raise NonPhysicalCorrelationError(
            f"A^2 - B^2 = {a_minus_b * a_plus_b!r} is not positive")
    if b == 0.0:
        return 0.0
    return float(b / (a + np.sqrt(a_minus_b * a_plus_b)))


def entropy_from_modes(y, weights=None) -> float:
    """Sum over modes of ``-ln(1-y) - y/(1-y) ln y`` times the mode weight.

    Each term is the von Neumann entropy of a geometric spectrum with ratio
    ``y``. ``weights`` default to one per mode.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(~np.isfinite(y)) or np.any(y < 0) or np.any(y >= 1):
        raise DomainError("every y must lie in [0, 1)")
    if weights is None:
        weights = np.ones_like(y)
    weights = np.atleast_1d(np.asarray(weights, dtype=float))
    if weights.shape != y.shape:
        raise InvalidInputError("weights and y must have the same length")
    if np.any(weights <= 0):
        raise DomainError("mode weights must be positive")
    per_mode = -np.log1p(-y) - xlogy(y, y) / (1.0 - y)
    return float(np.sum(weights * per_mode))


def pointer_width(g1: float, g2: float, g12: float, s12: float) -> float:
    """Effective real width of the most probable (pointer) eigenstate.

    Equals ``4 g1`` without correlations.
    """
    p = g1 * g2
    denom = 1.0 - p * (g12 ** 2 - s12 ** 2) - (p * g12 * s12) ** 2
    if denom <= 0:
        raise NonPhysicalCorrelationError(
            f"pointer-width denominator {denom!r} is not positive")
    return 4.0 * g1 / denom


@dataclass(frozen=True)
class CorrelationBlock:
    """Widths and system-environment cross-correlations of a two-field
    Gaussian."""

    g1: float
    g2: float
    g12: float = 0.0
    s12: float = 0.0

    def __post_init__(self):
        if not (self.g1 > 0 and self.g2 > 0):
            raise InvalidInputError("g1 and g2 must be positive")

    @property
    def y(self) -> float:
        return compute_y(self.g1, self.g2, self.g12, self.s12)

    @property
    def entropy(self) -> float:
        return entropy_from_modes([self.y])

    @property
    def pointer_width(self) -> float:
        return pointer_width(self.g1, self.g2, self.g12, self.s12)


def _log_series(t, s):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if t.shape != s.shape or t.ndim != 1:
        raise InvalidInputError("times and values must be 1-D of equal length")
    if t.size < 3:
        raise InvalidInputError("need at least 3 samples")
    if np.any(~(s > 0)):
        raise UndefinedTimescaleError("entropy must be strictly positive on the window")
    return t, np.log(s)


def entropy_timescale(t, s) -> float:
    """Inverse logarithmic growth rate ``1 / (d ln S / dt)``.

    The slope is the least-squares fit of ``ln S`` against ``t``.

    Raises
    ------
    UndefinedTimescaleError
        If any sample is non-positive, or the slope vanishes (``tau=inf``).
    """
    t, ls = _log_series(t, s)
    slope = np.polyfit(t, ls, 1)[0]
    span = t[-1] - t[0]
    if not np.isfinite(slope) or abs(slope) * abs(span) < 1e-12:
        raise UndefinedTimescaleError("logarithmic growth rate vanishes", tau=np.inf)
    return float(1.0 / slope)


def local_timescale(t, s) -> np.ndarray:
    """Pointwise ``1 / (d ln S / dt)`` by second-order finite differences."""
    t, ls = _log_series(t, s)
    with np.errstate(divide="ignore"):
        return 1.0 / np.gradient(ls, t)


def dof_entropy_ratio(g_sys: float, g_env: float) -> float:
    """Ratio of thermal entropies of two ideal gases with ``g_sys`` and
    ``g_env`` effective degrees of freedom at equal temperature and volume."""
    if not (g_sys > 0 and g_env > 0):
        raise DomainError("degree-of-freedom counts must be positive")
    return g_sys / g_env
