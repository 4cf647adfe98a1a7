"""A particle coupled to a finite oscillator bath, evolved exactly.

The Hamiltonian is

    H = p^2 / 2M + sum_n [ P_n^2 / 2 m_n + m_n w_n^2 (X_n - x)^2 / 2 ]

with bath masses fixed by the spectral density
``I(w) = g W^3 F(w / W)`` on ``(0, W]``. Because ``H`` is quadratic, a
Gaussian state stays Gaussian, and the evolution is a symplectic map
applied to the means and the covariance matrix.

Bath coordinates are rescaled to ``q_n = sqrt(m_n w_n) X_n`` and
``k_n = P_n / sqrt(m_n w_n)``. Modes with ``m_n = 0`` (``g = 0``) then
stay regular. Phase-space ordering is
``(x, q_1..q_N, p, k_1..k_N)`` and ``hbar = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, InvalidInputError
from .numerics.gaussian import (linear_flow, mode_entropy, symplectic_eigenvalues,
                                symplectic_form)

__all__ = [
    "BathModel",
    "BathSpec",
    "FullGaussianState",
    "ParticleInit",
    "ParticleObservables",
    "alpha_and_tplus",
    "discretize_bath",
    "effective_g0",
    "evolve_exact",
    "g0_parameter",
    "ground_state_width",
    "initial_state",
    "particle_observables",
    "run",
]

ShapeLike = Union[None, Callable, tuple]


def _flat(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class BathSpec:
    """Spectral density ``I(w) = g W^3 F(w / W)`` below the cutoff ``W``.

    ``shape`` is a callable ``F(x)`` on ``(0, 1]`` or a table ``(x, F)``
    interpolated linearly, with ``F(0) = 0`` below the first node. ``None``
    means ``F = 1``. ``discretization`` is ``"uniform"`` or ``"log"``.
    """

    big_omega: float = 1.0
    g: float = 1.0
    shape: ShapeLike = None
    n_modes: int = 256
    discretization: str = "uniform"
    log_min: float = 1e-3

    def __post_init__(self):
        if not self.big_omega > 0:
            raise InvalidInputError("cutoff frequency must be positive")
        if not self.g >= 0:
            raise InvalidInputError("coupling g must be non-negative")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise InvalidInputError("n_modes must be a positive integer")
        if self.discretization not in ("uniform", "log"):
            raise InvalidInputError("discretization must be 'uniform' or 'log'")
        if not 0 < self.log_min < 1:
            raise InvalidInputError("log_min must lie in (0, 1)")
        if isinstance(self.shape, tuple):
            x, f = (np.asarray(a, dtype=float) for a in self.shape)
            if x.ndim != 1 or x.shape != f.shape or x.size < 2:
                raise InvalidInputError("tabulated shape needs matching 1-D x and F")
            if np.any(np.diff(x) <= 0) or x[0] <= 0 or x[-1] < 1:
                raise InvalidInputError("table nodes must increase over (0, 1]")
            if np.any(f < 0):
                raise InvalidInputError("shape function F must be non-negative")

    def shape_fn(self) -> Callable:
        if self.shape is None:
            return _flat
        if callable(self.shape):
            return self.shape
        x, f = (np.asarray(a, dtype=float) for a in self.shape)
        xs = np.concatenate([[0.0], x])
        fs = np.concatenate([[0.0], f])
        return lambda u: np.interp(u, xs, fs)

    def spectral_density(self, w):
        w = np.asarray(w, dtype=float)
        f = self.shape_fn()(w / self.big_omega)
        return np.where((w > 0) & (w <= self.big_omega), self.g * self.big_omega ** 3 * f, 0.0)


def discretize_bath(spec: BathSpec) -> tuple[np.ndarray, np.ndarray]:
    """Bath masses and frequencies ``(m_n, w_n)``.

    Nodes are the right edges of the bins. Uniform bins have
    ``w_n = n W / N``. Log bins span ``[log_min W, W]`` geometrically. Each
    mass is ``m_n = 2 I(w_n) dw_n / w_n^3``.

    Raises
    ------
    InvalidInputError
        If ``F`` is negative at a node.
    """
    n, om = int(spec.n_modes), spec.big_omega
    if spec.discretization == "uniform":
        edges = np.linspace(0.0, om, n + 1)
    else:
        edges = np.concatenate([[0.0], np.geomspace(spec.log_min * om, om, n)])
    w = edges[1:]
    dw = np.diff(edges)
    f = np.asarray(spec.shape_fn()(w / om), dtype=float) * np.ones_like(w)
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise InvalidInputError("shape function F must be finite and non-negative")
    m = 2.0 * spec.g * om ** 3 * f * dw / w ** 3
    return m, w


def g0_parameter(spec: BathSpec) -> float:
    """``g0 = g * int_0^1 F(x) / x dx``.

    Raises
    ------
    DomainError
        If ``F`` does not vanish at the origin, so the integral diverges.
    """
    fn = spec.shape_fn()
    scale = float(np.max(np.abs(fn(np.linspace(1e-3, 1.0, 1001)))))
    # F(x)/x is integrable only if F vanishes at the origin
    if float(np.asarray(fn(np.array([1e-14])))[0]) > 1e-6 * max(scale, 1e-300):
        raise DomainError("F(x)/x is not integrable at 0; g0 diverges")
    points = None
    if isinstance(spec.shape, tuple):
        points = np.asarray(spec.shape[0], dtype=float)
        points = points[(points > 0) & (points < 1)][:400]
    val, _ = quad(lambda x: float(fn(np.array([x]))[0]) / x, 0.0, 1.0, limit=1000,
                  points=points, epsabs=1e-13, epsrel=1e-11)
    return float(spec.g * val)


def effective_g0(masses, freqs, big_omega: float) -> float:
    """Discrete counterpart ``sum m_n w_n^2 / (2 W^3)`` of ``g0``.

    Always finite. It coincides with :func:`g0_parameter` in the continuum
    limit whenever the latter exists.
    """
    return float(np.sum(np.asarray(masses) * np.asarray(freqs) ** 2) / (2.0 * big_omega ** 3))


@dataclass(frozen=True)
class ParticleInit:
    """Mass, initial packet width (position standard deviation) and
    velocity."""

    mass: float = 1.0
    w0: float = 1.0
    v0: float = 1.0

    def __post_init__(self):
        if not (self.mass > 0 and self.w0 > 0):
            raise InvalidInputError("mass and width must be positive")


def alpha_and_tplus(particle: ParticleInit, big_omega: float, g0: float, t=0.0):
    """``alpha = (Omega / M) (w0 Omega)^-4 / (2 g0)`` and
    ``t_plus = Omega t sqrt(2 g0 Omega / M)``.

    Raises
    ------
    DomainError
        If ``g0 <= 0``; the scaling variables are then undefined.
    """
    if not g0 > 0:
        raise DomainError("alpha and t_plus need g0 > 0")
    om, mass = big_omega, particle.mass
    alpha = (om / mass) * (particle.w0 * om) ** -4 / (2.0 * g0)
    tplus = om * np.asarray(t, dtype=float) * np.sqrt(2.0 * g0 * om / mass)
    return float(alpha), tplus if np.ndim(tplus) else float(tplus)


def ground_state_width(mass: float, big_omega: float, g0: float) -> float:
    """Position spread of the ground state in the induced harmonic well
    ``M w_eff^2 = 2 g0 Omega^3``; at this width ``alpha = 4``."""
    return float((8.0 * mass * g0 * big_omega ** 3) ** -0.25)


@dataclass
class BathModel:
    """Quadratic Hamiltonian ``H = z^T K z / 2`` of particle plus bath."""

    particle: ParticleInit
    masses: np.ndarray
    freqs: np.ndarray
    big_omega: float = 1.0
    hamiltonian: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        self.freqs = np.asarray(self.freqs, dtype=float)
        if self.masses.shape != self.freqs.shape or self.masses.ndim != 1:
            raise InvalidInputError("masses and frequencies must be matching 1-D arrays")
        if np.any(self.masses < 0) or np.any(self.freqs <= 0):
            raise InvalidInputError("need m_n >= 0 and w_n > 0")
        n = self.masses.size
        c = np.sqrt(self.masses * self.freqs ** 3)
        kx = np.zeros((n + 1, n + 1))
        kx[0, 0] = np.sum(self.masses * self.freqs ** 2)
        kx[0, 1:] = kx[1:, 0] = -c
        kx[1:, 1:] = np.diag(self.freqs)
        kp = np.diag(np.concatenate([[1.0 / self.particle.mass], self.freqs]))
        zero = np.zeros_like(kx)
        self.hamiltonian = np.block([[kx, zero], [zero, kp]])

    @classmethod
    def from_spec(cls, particle: ParticleInit, spec: BathSpec) -> "BathModel":
        m, w = discretize_bath(spec)
        return cls(particle, m, w, spec.big_omega)

    @property
    def n_modes(self) -> int:
        return self.masses.size

    @property
    def g0(self) -> float:
        return effective_g0(self.masses, self.freqs, self.big_omega)

    @property
    def generator(self) -> np.ndarray:
        return symplectic_form(self.n_modes + 1) @ self.hamiltonian

    def energy(self, state: "FullGaussianState") -> float:
        k = self.hamiltonian
        return float(0.5 * state.means @ k @ state.means + 0.5 * np.sum(k * state.cov))


@dataclass
class FullGaussianState:
    """Means and covariance of particle plus bath, at time ``t``."""

    means: np.ndarray
    cov: np.ndarray
    t: float = 0.0

    @property
    def n_modes(self) -> int:
        return self.means.size // 2

    def particle_cov(self) -> np.ndarray:
        i = [0, self.n_modes]
        return self.cov[np.ix_(i, i)]

    def bath_cov(self) -> np.ndarray:
        n = self.n_modes
        idx = np.r_[1:n, n + 1:2 * n]
        return self.cov[np.ix_(idx, idx)]

    def purity(self) -> float:
        nu = symplectic_eigenvalues(self.cov)
        return float(np.prod(0.5 / nu))


def initial_state(model: BathModel) -> FullGaussianState:
    """Minimal-uncertainty packet times the bath ground state.

    ``<x> = 0``, ``<p> = M v0``, ``var x = w0^2``, ``var p = 1/(4 w0^2)``.
    Each bath mode has unit-scaled variance 1/2 in both quadratures.
    """
    p = model.particle
    n = model.n_modes + 1
    means = np.zeros(2 * n)
    means[n] = p.mass * p.v0
    diag = np.full(2 * n, 0.5)
    diag[0] = p.w0 ** 2
    diag[n] = 0.25 / p.w0 ** 2
    return FullGaussianState(means, np.diag(diag), 0.0)


def _propagate(state: FullGaussianState, flow: np.ndarray, dt: float) -> FullGaussianState:
    cov = flow @ state.cov @ flow.T
    return FullGaussianState(flow @ state.means, 0.5 * (cov + cov.T), state.t + dt)


def evolve_exact(state: FullGaussianState, model: BathModel, t: float) -> FullGaussianState:
    """Advance ``state`` by ``t`` with ``S = exp(J K t)``."""
    if not t >= 0:
        raise InvalidInputError("evolution time must be non-negative")
    return _propagate(state, linear_flow(model.generator, t), t)


@dataclass(frozen=True)
class ParticleObservables:
    t: float
    width: float
    velocity: float
    s_lin: float
    s_vn: float
    s_env: float
    purity: float


def particle_observables(state: FullGaussianState, mass: float) -> ParticleObservables:
    """Width, velocity and entropies of the particle and of the bath.

    ``s_lin = 1 - 1/(2 nu)`` and ``s_vn`` use the particle's symplectic
    eigenvalue ``nu = sqrt(det V_particle)``. ``s_env`` is the same
    functional summed over the bath's symplectic spectrum.
    """
    vp = state.particle_cov()
    nu = np.sqrt(max(np.linalg.det(vp), 0.25))
    purity = 0.5 / nu
    s_env = float(np.sum(mode_entropy(symplectic_eigenvalues(state.bath_cov())))) \
        if state.n_modes > 1 else 0.0
    return ParticleObservables(
        t=state.t,
        width=float(np.sqrt(vp[0, 0])),
        velocity=float(state.means[state.n_modes] / mass),
        s_lin=float(1.0 - purity),
        s_vn=float(mode_entropy(nu)),
        s_env=s_env,
        purity=float(purity),
    )


@dataclass
class BrownianRun:
    """Per-time records of one exact run."""

    t: np.ndarray
    tplus: np.ndarray
    width_ratio: np.ndarray
    velocity_ratio: np.ndarray
    s_lin: np.ndarray
    s_vn: np.ndarray
    s_env: np.ndarray
    energy: np.ndarray
    purity: np.ndarray
    alpha: float = float("nan")

    RECORD_HEADER = ("t", "t_plus", "width_ratio", "velocity_ratio", "s_lin",
                     "s_vn", "s_env", "energy", "purity")

    def records(self) -> np.ndarray:
        return np.column_stack([self.t, self.tplus, self.width_ratio,
                                self.velocity_ratio, self.s_lin, self.s_vn,
                                self.s_env, self.energy, self.purity])

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0]))
                     / max(abs(self.energy[0]), 1e-300))

    @property
    def purity_defect(self) -> float:
        return float(np.max(np.abs(self.purity - 1.0)))


def run(model: BathModel, times: Sequence[float], env_entropy: bool = True) -> BrownianRun:
    """Evolve the initial state through ``times`` (ascending, from >= 0).

    Propagators for repeated step sizes are reused. ``purity`` is the
    global purity from the full symplectic spectrum. It is computed only
    when ``env_entropy`` is set and is NaN otherwise.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise InvalidInputError("times must be a non-empty ascending array >= 0")
    p = model.particle
    g0 = model.g0
    state = initial_state(model)
    gen = model.generator
    cache: dict[float, np.ndarray] = {}
    rows = []
    t_prev = 0.0
    for t in times:
        dt = t - t_prev
        if dt > 0:
            key = round(dt, 12)
            if key not in cache:
                cache[key] = linear_flow(gen, dt)
            state = _propagate(state, cache[key], dt)
            state.t = t
        t_prev = t
        obs = particle_observables(state, p.mass) if env_entropy else None
        vp = state.particle_cov()
        width = np.sqrt(vp[0, 0])
        vel = state.means[state.n_modes] / p.mass
        nu = np.sqrt(max(np.linalg.det(vp), 0.25))
        rows.append((
            t,
            width / p.w0,
            vel / p.v0 if p.v0 != 0 else np.nan,
            1.0 - 0.5 / nu,
            float(mode_entropy(nu)),
            obs.s_env if obs else np.nan,
            model.energy(state),
            state.purity() if env_entropy else np.nan,
        ))
    arr = np.array(rows, dtype=float)
    if g0 > 0:
        alpha, tplus = alpha_and_tplus(p, model.big_omega, g0, arr[:, 0])
    else:
        alpha, tplus = float("nan"), np.full(arr.shape[0], np.nan)
    return BrownianRun(t=arr[:, 0], tplus=np.asarray(tplus, dtype=float),
                       width_ratio=arr[:, 1], velocity_ratio=arr[:, 2],
                       s_lin=arr[:, 3], s_vn=arr[:, 4], s_env=arr[:, 5],
                       energy=arr[:, 6], purity=arr[:, 7], alpha=alpha)
