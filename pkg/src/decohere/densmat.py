"""Finite-dimensional density-matrix laboratory.

Unitary evolution, partial traces of bipartite pure states and the equality
of subsystem entropies, plus random-state generators used by the checks.
"""

from __future__ import annotations

import numpy as np

from .entropy import validate_density_matrix, von_neumann_entropy
from .errors import InvalidInputError

__all__ = [
    "entropy_equality_check",
    "partial_trace",
    "random_density_matrix",
    "random_hermitian",
    "random_pure_bipartite",
    "random_unitary",
    "schmidt_entropy",
    "unitary_evolve",
    "validate_bipartite",
]


def _hermitian(H, tol=1e-12) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidInputError("Hamiltonian must be square")
    if np.max(np.abs(H - H.conj().T)) > tol * max(1.0, np.max(np.abs(H))):
        raise InvalidInputError("Hamiltonian is not Hermitian")
    return H


def unitary_evolve(rho, H, t: float) -> np.ndarray:
    """``exp(-iHt) rho exp(iHt)`` using the spectral decomposition of ``H``."""
    rho = validate_density_matrix(rho)
    H = _hermitian(H)
    if H.shape != rho.shape:
        raise InvalidInputError(f"dimension mismatch: rho {rho.shape}, H {H.shape}")
    e, v = np.linalg.eigh(H)
    u = (v * np.exp(-1j * e * t)) @ v.conj().T
    out = u @ rho @ u.conj().T
    return 0.5 * (out + out.conj().T)


def validate_bipartite(psi, tol: float = 1e-12) -> np.ndarray:
    """Check a ``dimA x dimB`` amplitude matrix is normalised."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 2 or min(psi.shape) < 1:
        raise InvalidInputError("amplitudes must form a dimA x dimB matrix")
    norm = np.sum(np.abs(psi) ** 2)
    if abs(norm - 1.0) > tol:
        raise InvalidInputError(f"state norm is {norm!r}, not 1")
    return psi


def partial_trace(psi, keep: str = "A") -> np.ndarray:
    """Reduced density matrix of subsystem ``keep`` ("A" rows, "B" columns)."""
    psi = validate_bipartite(psi)
    if keep == "A":
        rho = psi @ psi.conj().T
    elif keep == "B":
        rho = psi.T @ psi.conj()
    else:
        raise InvalidInputError("keep must be 'A' or 'B'")
    return 0.5 * (rho + rho.conj().T)


def schmidt_entropy(psi) -> float:
    """Entanglement entropy from the Schmidt coefficients (singular values)."""
    s = np.linalg.svd(validate_bipartite(psi), compute_uv=False)
    p = s ** 2
    p = p[p > 1e-14]
    return float(-np.sum(p * np.log(p)))


def entropy_equality_check(psi) -> tuple[float, float, float]:
    """Entropies of both reductions of a global pure state and their gap.

    Only global pure states are accepted; for those the two subsystem
    entropies coincide.
    """
    s_a = von_neumann_entropy(partial_trace(psi, "A"))
    s_b = von_neumann_entropy(partial_trace(psi, "B"))
    return s_a, s_b, abs(s_a - s_b)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (z + z.conj().T)


def random_density_matrix(dim: int, rng: np.random.Generator, rank=None) -> np.ndarray:
    """Random mixed state ``W W^+ / Tr`` with ``W`` of shape ``dim x rank``."""
    rank = dim if rank is None else rank
    w = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = w @ w.conj().T
    rho /= np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def random_pure_bipartite(dim_a: int, dim_b: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal((dim_a, dim_b)) + 1j * rng.standard_normal((dim_a, dim_b))
    return psi / np.linalg.norm(psi)
