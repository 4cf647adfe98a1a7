"""Gaussian-state linear algebra: symplectic form, symplectic eigenvalues,
entropy and purity of covariance matrices, and exact linear flows.

Phase-space ordering is ``(x_1, ..., x_n, p_1, ..., p_n)`` and ``hbar = 1``,
so the vacuum covariance is ``I / 2``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from ..errors import InvalidInputError

__all__ = [
    "POSITIVITY_TOL",
    "gaussian_entropy",
    "gaussian_purity",
    "is_physical",
    "linear_flow",
    "mode_entropy",
    "random_symplectic",
    "reduce_covariance",
    "symplectic_defect",
    "symplectic_eigenvalues",
    "symplectic_form",
]

POSITIVITY_TOL = 1e-9


def symplectic_form(n: int) -> np.ndarray:
    """``J = [[0, I], [-I, 0]]`` for ``n`` degrees of freedom."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _covariance(V) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
        raise InvalidInputError("covariance must be a square matrix of even size")
    if not np.all(np.isfinite(V)):
        raise InvalidInputError("covariance has non-finite entries")
    if np.max(np.abs(V - V.T)) > 1e-10 * max(1.0, np.max(np.abs(V))):
        raise InvalidInputError("covariance is not symmetric")
    return 0.5 * (V + V.T)


def symplectic_eigenvalues(V) -> np.ndarray:
    """Symplectic spectrum ``nu_1 <= ... <= nu_n`` of a covariance matrix.

    These are the moduli of the eigenvalues of ``iJV``. They are computed
    from the Hermitian matrix ``i V^{1/2} J V^{1/2}``, whose eigenvalues are
    ``+-nu_k``, which keeps the result real and well conditioned.

    Raises
    ------
    InvalidInputError
        If ``V`` is not symmetric positive definite.
    """
    V = _covariance(V)
    w, u = np.linalg.eigh(V)
    if w.min() <= 0:
        raise InvalidInputError("covariance is not positive definite")
    n = V.shape[0] // 2
    root = (u * np.sqrt(w)) @ u.T
    m = 1j * root @ symplectic_form(n) @ root
    ev = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return np.sort(ev[n:])


def is_physical(V, tol: float = POSITIVITY_TOL) -> bool:
    """Gaussian positivity ``V + iJ/2 >= 0``, via ``nu_k >= 1/2 - tol``."""
    try:
        return bool(symplectic_eigenvalues(V).min() >= 0.5 - tol)
    except InvalidInputError:
        return False


def mode_entropy(nu) -> np.ndarray:
    """Entropy of a thermal mode with symplectic eigenvalue ``nu``:
    ``(nu + 1/2) ln(nu + 1/2) - (nu - 1/2) ln(nu - 1/2)``."""
    nu = np.maximum(np.asarray(nu, dtype=float), 0.5)
    a = nu + 0.5
    b = nu - 0.5
    with np.errstate(divide="ignore", invalid="ignore"):
        tb = np.where(b > 0, b * np.log(np.where(b > 0, b, 1.0)), 0.0)
    return a * np.log(a) - tb


def gaussian_entropy(V) -> float:
    """Von Neumann entropy of the Gaussian state with covariance ``V``."""
    return float(np.sum(mode_entropy(symplectic_eigenvalues(V))))


def gaussian_purity(V) -> float:
    """``Tr rho^2 = 1 / (2^n sqrt(det V))``."""
    V = _covariance(V)
    n = V.shape[0] // 2
    sign, logdet = np.linalg.slogdet(V)
    if sign <= 0:
        raise InvalidInputError("covariance is not positive definite")
    return float(np.exp(-n * np.log(2.0) - 0.5 * logdet))


def reduce_covariance(V, keep) -> np.ndarray:
    """Covariance of the modes listed in ``keep`` (partial trace)."""
    V = _covariance(V)
    n = V.shape[0] // 2
    keep = np.asarray(keep, dtype=int)
    idx = np.concatenate([keep, keep + n])
    return V[np.ix_(idx, idx)]


def linear_flow(A, t: float = 1.0) -> np.ndarray:
    """``exp(A t)`` by scaling and squaring (Pade)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError("generator must be square")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("generator has non-finite entries")
    return scipy.linalg.expm(A * t)


def symplectic_defect(S) -> float:
    """Max-norm of ``S^T J S - J``."""
    S = np.asarray(S, dtype=float)
    J = symplectic_form(S.shape[0] // 2)
    return float(np.max(np.abs(S.T @ J @ S - J)))


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """``exp(J H)`` for a random symmetric ``H``; always symplectic."""
    h = rng.standard_normal((2 * n, 2 * n)) * scale
    return linear_flow(symplectic_form(n) @ (h + h.T) / 2)
