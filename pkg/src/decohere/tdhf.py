"""Gaussian (Hartree-Fock) dynamics of a system field coupled to an
environment field, in the spatially homogeneous limit.

Each field carries the potential ``v(phi) = -mu^2 phi^2 / 2 + lam phi^4 / 24``.
The fields couple through ``-mu12^2 phi_1 phi_2``. The environment has no
mean field. The state is the vector

    (phi1, pi1, g1, s1, g2, s2, g12, s12)

with widths ``G_j`` (position variance ``hbar G_j`` when uncorrelated),
conjugate parameters ``Sigma_j``, and cross-correlations ``G12, Sigma12``.

Three right-hand sides are available:

``"exact"`` (default)
    The exact equations of motion of the Gaussian ansatz. They follow from
    the matrix Riccati equation ``dZ/dt = i (H - Z^2)`` for the complex
    width matrix ``Z``. This variant conserves :func:`conserved_energy`.
``"literal"``
    The equations in reduced form. The ``Sigma_j``
    equations carry ``-mu12^2 G_j' G12``. The ``Sigma12`` equation has
    ``+(1/G1 + 1/G2) Sigma12 / 2``. Widths are not corrected for
    correlations.
``"symmetric"``
    As ``"literal"`` but with the sign of that ``Sigma12`` term flipped to
    mirror the ``G12`` equation.

Only ``"exact"`` conserves energy once ``mu12^2 != 0``. The other two are
kept for comparison, and their energy drift is reported.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .entropy import compute_y, entropy_from_modes, entropy_timescale, local_timescale, pointer_width
from .errors import (DegenerateCorrelationError, DomainError, InvalidInputError,
                     NonPhysicalCorrelationError, PositivityError)
from .numerics.ode import OdeProblem, integrate, jit_rhs

__all__ = [
    "CouplingSpec",
    "PotentialSpec",
    "TdhfModel",
    "TdhfState",
    "TdhfTrajectory",
    "VARIANTS",
    "calibrate_double_well",
    "conserved_energy",
    "decoherence_time_analytic",
    "decoherence_time_numeric",
    "evolve",
    "formal_solution_residual",
    "local_decoherence_times",
    "rhs",
    "short_time_correlations",
    "static_energy",
    "static_minimum",
]

log = logging.getLogger(__name__)

VARIANTS = {"exact": 0, "literal": 1, "symmetric": 2}
STATE_FIELDS = ("phi1", "pi1", "g1", "s1", "g2", "s2", "g12", "s12")
Y_ADVISORY = 0.1


@dataclass(frozen=True)
class PotentialSpec:
    """``v(phi) = -mu_sq phi^2 / 2 + lam phi^4 / 24``."""

    mu_sq: float
    lam: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.mu_sq) and np.isfinite(self.lam)):
            raise InvalidInputError("potential parameters must be finite")
        if self.lam < 0:
            raise InvalidInputError("quartic coupling must be non-negative")
        if self.lam == 0 and self.mu_sq >= 0:
            raise InvalidInputError("a purely quadratic potential needs mu_sq < 0")

    @classmethod
    def harmonic(cls, omega: float) -> "PotentialSpec":
        return cls(mu_sq=-omega ** 2, lam=0.0)

    def v(self, phi):
        return -0.5 * self.mu_sq * phi ** 2 + self.lam * phi ** 4 / 24.0

    def d1(self, phi):
        return -self.mu_sq * phi + self.lam * phi ** 3 / 6.0

    def d2(self, phi):
        return -self.mu_sq + 0.5 * self.lam * phi ** 2

    def d3(self, phi):
        return self.lam * phi


@dataclass(frozen=True)
class CouplingSpec:
    """Bilinear coupling ``-mu12_sq phi_1 phi_2``."""

    mu12_sq: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.mu12_sq):
            raise InvalidInputError("coupling must be finite")


@dataclass(frozen=True)
class TdhfState:
    """The eight variational parameters plus ``hbar``."""

    phi1: float
    pi1: float
    g1: float
    s1: float
    g2: float
    s2: float
    g12: float = 0.0
    s12: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.g1 > 0 and self.g2 > 0):
            raise InvalidInputError("widths g1, g2 must be positive")
        if self.hbar < 0:
            raise InvalidInputError("hbar must be non-negative")
        if 1.0 - self.g1 * self.g2 * self.g12 ** 2 <= 0:
            raise NonPhysicalCorrelationError("correlation block is not normalisable")

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in STATE_FIELDS], dtype=float)

    @classmethod
    def from_array(cls, y, hbar: float = 1.0) -> "TdhfState":
        return cls(*map(float, y), hbar=hbar)

    def replace(self, **kw) -> "TdhfState":
        d = asdict(self)
        d.update(kw)
        return TdhfState(**d)


@dataclass(frozen=True)
class TdhfModel:
    """System potential, environment potential, coupling and equation
    variant."""

    v1: PotentialSpec
    v2: PotentialSpec
    coupling: CouplingSpec = field(default_factory=CouplingSpec)
    variant: str = "exact"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"variant must be one of {sorted(VARIANTS)}")

    def params(self, hbar: float) -> np.ndarray:
        return np.array([self.v1.mu_sq, self.v1.lam, self.v2.mu_sq, self.v2.lam,
                         self.coupling.mu12_sq, hbar, VARIANTS[self.variant]],
                        dtype=float)


@jit_rhs
def _rhs(t, y, p):
    mu1, lam1, mu2, lam2, c, hbar, variant = p[0], p[1], p[2], p[3], p[4], p[5], p[6]
    q, pi, g1, s1, g2, s2, g12, s12 = y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7]
    out = np.empty(8)
    ginv = 1.0 / g1 + 1.0 / g2
    ssum = s1 + s2
    v1d1 = -mu1 * q + lam1 * q ** 3 / 6.0
    v1d2 = -mu1 + 0.5 * lam1 * q * q
    v2d2 = -mu2
    out[0] = pi
    out[6] = -2.0 * ssum * g12 - 0.5 * ginv * s12
    if variant == 0.0:
        d = 1.0 - g1 * g2 * g12 * g12
        gb1 = g1 / d
        gb2 = g2 / d
        h11 = v1d2 + 0.5 * lam1 * hbar * gb1
        h22 = v2d2 + 0.5 * lam2 * hbar * gb2
        cross = 0.125 * (g12 * g12 - s12 * s12)
        out[1] = -v1d1 - 0.5 * lam1 * q * hbar * gb1
        out[2] = 4.0 * s1 * g1 + g1 * g1 * g12 * s12
        out[3] = -2.0 * s1 * s1 + 0.125 / (g1 * g1) - 0.5 * h11 + cross
        out[4] = 4.0 * s2 * g2 + g2 * g2 * g12 * s12
        out[5] = -2.0 * s2 * s2 + 0.125 / (g2 * g2) - 0.5 * h22 + cross
        out[7] = 2.0 * c + 0.5 * ginv * g12 - 2.0 * ssum * s12
    else:
        out[1] = -v1d1 - 0.5 * hbar * lam1 * q * g1
        out[2] = 4.0 * s1 * g1
        out[3] = (-2.0 * s1 * s1 + 0.125 / (g1 * g1) - 0.5 * v1d2
                  - 0.25 * hbar * lam1 * g1 - c * g2 * g12)
        out[4] = 4.0 * s2 * g2
        out[5] = (-2.0 * s2 * s2 + 0.125 / (g2 * g2) - 0.5 * v2d2
                  - 0.25 * hbar * lam2 * g2 - c * g1 * g12)
        sign = 1.0 if variant == 1.0 else -1.0
        out[7] = -2.0 * ssum * s12 + sign * 0.5 * ginv * s12 + 2.0 * c
    return out


def rhs(state: TdhfState, model: TdhfModel) -> np.ndarray:
    """Time derivative of the state vector under ``model``."""
    return _rhs(0.0, np.ascontiguousarray(state.to_array()), model.params(state.hbar))


def _energy_arrays(y, model: TdhfModel, hbar: float):
    y = np.atleast_2d(y)
    q, p, g1, s1, g2, s2, g12, s12 = y.T
    d = 1.0 - g1 * g2 * g12 ** 2
    gb1, gb2 = g1 / d, g2 / d
    # U = Re Z, W = Im Z of the complex width matrix
    u = np.empty((y.shape[0], 2, 2))
    u[:, 0, 0], u[:, 1, 1] = 0.5 / g1, 0.5 / g2
    u[:, 0, 1] = u[:, 1, 0] = 0.5 * g12
    w = np.empty_like(u)
    w[:, 0, 0], w[:, 1, 1] = -2.0 * s1, -2.0 * s2
    w[:, 0, 1] = w[:, 1, 0] = -0.5 * s12
    uinv = np.linalg.inv(u)
    kin = 0.25 * hbar * np.trace(u + w @ uinv @ w, axis1=1, axis2=2)
    v1, v2 = model.v1, model.v2
    pot = (v1.v(q) + 0.5 * hbar * v1.d2(q) * gb1 + v1.lam * hbar ** 2 * gb1 ** 2 / 8.0
           + 0.5 * hbar * v2.d2(0.0) * gb2 + v2.lam * hbar ** 2 * gb2 ** 2 / 8.0)
    coupling = -model.coupling.mu12_sq * 0.5 * hbar * uinv[:, 0, 1]
    return 0.5 * p ** 2 + pot + kin + coupling


def conserved_energy(state: TdhfState, model: TdhfModel) -> float:
    """Expectation value of the Hamiltonian in the Gaussian state.

    For an uncorrelated system field this is
    ``pi^2/2 + v + hbar (2 Sigma^2 G + 1/(8G) + v'' G / 2) + hbar^2 lam G^2 / 8``.
    """
    return float(_energy_arrays(state.to_array(), model, state.hbar)[0])


def static_energy(phi, g, pot: PotentialSpec, hbar: float = 1.0):
    """Energy of a static (``pi = Sigma = 0``) uncorrelated system state."""
    return (pot.v(phi) + hbar * (0.125 / g + 0.5 * pot.d2(phi) * g)
            + hbar ** 2 * pot.lam * g ** 2 / 8.0)


def static_minimum(pot: PotentialSpec, hbar: float = 1.0):
    """Global minimum ``(E_min, phi_min >= 0, G_min)`` of the static energy."""
    if pot.lam == 0:
        omega = np.sqrt(-pot.mu_sq)
        return 0.5 * hbar * omega, 0.0, 0.5 / omega

    def phi_opt(g):
        # stationary mean field for a given width, from dE/dphi = 0
        return np.sqrt(max(6.0 * (pot.mu_sq - 0.5 * hbar * pot.lam * g) / pot.lam, 0.0))

    def f(lg):
        g = np.exp(lg)
        return static_energy(phi_opt(g), g, pot, hbar)

    grid = np.linspace(-12.0, 6.0, 721)
    k = int(np.argmin([f(x) for x in grid]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    r = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    g = float(np.exp(r.x))
    return float(r.fun), float(phi_opt(g)), g


def calibrate_double_well(lam: float = 24.0, e_min: float = -24.3,
                          hbar: float = 1.0) -> PotentialSpec:
    """Solve for ``mu_sq`` so the static Gaussian minimum equals ``e_min``.

    The classical hilltop ``v(0) = 0`` is fixed by the potential's form.
    """
    if not (lam > 0 and e_min < 0):
        raise DomainError("calibration needs lam > 0 and a negative target")

    def excess(mu_sq):
        return static_minimum(PotentialSpec(mu_sq, lam), hbar)[0] - e_min

    lo, hi = 1e-3, 1.0
    while excess(hi) > 0:
        hi *= 2.0
        if hi > 1e6:
            raise DomainError("calibration target out of reach")
    return PotentialSpec(brentq(excess, lo, hi, xtol=1e-13, rtol=1e-15), lam)


@dataclass
class TdhfTrajectory:
    """Uniformly sampled run with derived observables.

    ``states`` columns follow ``STATE_FIELDS``. ``dense`` holds the
    integrator trajectory for off-grid evaluation.
    """

    t: np.ndarray
    states: np.ndarray
    energy: np.ndarray
    y: np.ndarray
    entropy: np.ndarray
    g_eff: np.ndarray
    model: TdhfModel
    hbar: float
    dense: object = field(default=None, repr=False)
    advisories: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return self.states[:, STATE_FIELDS.index(name)]

    @property
    def energy_drift(self) -> float:
        """``max |E(t) - E(0)| / max(|E(0)|, 1)``."""
        return float(np.max(np.abs(self.energy - self.energy[0]))
                     / max(abs(self.energy[0]), 1.0))

    def records(self):
        """Rows ``(t, phi1, ..., s12, energy, Y, S_S, G_eff)``."""
        return np.column_stack([self.t, self.states, self.energy, self.y,
                                self.entropy, self.g_eff])

    RECORD_HEADER = ("t",) + STATE_FIELDS + ("energy", "Y", "S_S", "G_eff")


def _derived(states):
    n = states.shape[0]
    y = np.empty(n)
    s = np.empty(n)
    ge = np.empty(n)
    for i, row in enumerate(states):
        g1, g2, g12, s12 = row[2], row[4], row[6], row[7]
        if not (g1 > 0 and g2 > 0):
            raise PositivityError(f"width left the positive region at sample {i}")
        try:
            y[i] = compute_y(g1, g2, g12, s12)
            ge[i] = pointer_width(g1, g2, g12, s12)
        except NonPhysicalCorrelationError as exc:
            raise PositivityError(f"Gaussian positivity lost at sample {i}: {exc}") from exc
        s[i] = entropy_from_modes([y[i]])
    return y, s, ge


def evolve(state0: TdhfState, model: TdhfModel, t_end: float, n_out: int = 1001,
           rtol: float = 1e-11, atol: float = 1e-13) -> TdhfTrajectory:
    """Integrate from ``state0`` to ``t_end`` and sample ``n_out`` uniform
    times.

    Raises
    ------
    PositivityError
        If a width or the correlation block leaves the physical region.
    IntegrationError
        On integrator failure.
    """
    if not t_end > 0 or n_out < 2:
        raise InvalidInputError("need t_end > 0 and at least two output samples")
    problem = OdeProblem(_rhs, (0.0, t_end), state0.to_array(), rtol=rtol,
                         atol=atol, params=model.params(state0.hbar))
    traj = integrate(problem)
    t = np.linspace(0.0, t_end, n_out)
    states = traj(t)
    states[0] = state0.to_array()
    y, s, ge = _derived(states)
    energy = _energy_arrays(states, model, state0.hbar)
    out = TdhfTrajectory(t=t, states=states, energy=energy, y=y, entropy=s,
                         g_eff=ge, model=model, hbar=state0.hbar, dense=traj)
    if np.max(y) > Y_ADVISORY:
        out.advisories.append(
            f"Y reached {np.max(y):.3g}; beyond the small-correlation regime")
    for msg in out.advisories:
        log.info(msg)
    return out


def short_time_correlations(state0: TdhfState, coupling: CouplingSpec, t):
    """Quadratic short-time expansion of ``(G12(t), Sigma12(t))`` with all
    right-hand-side quantities frozen at their initial values."""
    t = np.asarray(t, dtype=float)
    mu = coupling.mu12_sq
    a = 1.0 / state0.g1 + 1.0 / state0.g2
    ss = state0.s1 + state0.s2
    g12, s12 = state0.g12, state0.s12
    g = g12 - 2.0 * (ss * g12 + 0.25 * a * s12) * t - 0.5 * mu * a * t ** 2
    s = s12 + 2.0 * (mu - ss * s12 + 0.25 * a * g12) * t - 2.0 * mu * ss * t ** 2
    return g, s


def formal_solution_residual(traj: TdhfTrajectory) -> float:
    """Largest deviation of ``G12(t)`` from its integral representation.

    The representation is the initial value damped by
    ``exp(-2 int (Sigma1 + Sigma2))``, minus the memory integral of
    ``Sigma12 (1/G1 + 1/G2) / 2`` with the same damping. It is evaluated by
    cumulative trapezoid quadrature on the stored samples.
    """
    t = np.asarray(traj.t)
    if t.size < 100:
        raise InvalidInputError("need at least 100 samples for the quadrature")
    g1, s1, g2, s2 = (traj.column(k) for k in ("g1", "s1", "g2", "s2"))
    g12, s12 = traj.column("g12"), traj.column("s12")
    dt = np.diff(t)

    def cumtrapz(f):
        return np.concatenate([[0.0], np.cumsum(0.5 * dt * (f[1:] + f[:-1]))])

    damp = 2.0 * cumtrapz(s1 + s2)
    source = 0.5 * s12 * (1.0 / g1 + 1.0 / g2) * np.exp(damp)
    formal = np.exp(-damp) * (g12[0] - cumtrapz(source))
    return float(np.max(np.abs(g12 - formal)))


def decoherence_time_analytic(state0: TdhfState, coupling: CouplingSpec,
                              form: str = "reduced") -> float:
    """Closed-form decoherence time from the initial correlations.

    ``form="reduced"`` uses
    ``1/tau = 4 (Sigma1 + Sigma2) + 4 mu12^2 Sigma12 / (G12^2 + Sigma12^2)``.
    ``form="consistent"`` drops the ``4 (Sigma1 + Sigma2)`` term. That term
    cancels when ``d ln[G1 G2 (G12^2 + Sigma12^2)]/dt`` is evaluated with the
    equations of motion. The two agree when ``Sigma1 + Sigma2 = 0``.

    Raises
    ------
    DegenerateCorrelationError
        If ``G12 = Sigma12 = 0``; then ``tau ~ t/2`` instead.
    """
    c2 = state0.g12 ** 2 + state0.s12 ** 2
    if c2 == 0.0:
        raise DegenerateCorrelationError(
            "zero initial correlations: the decoherence time vanishes as t/2")
    rate = 4.0 * coupling.mu12_sq * state0.s12 / c2
    if form == "reduced":
        rate += 4.0 * (state0.s1 + state0.s2)
    elif form != "consistent":
        raise InvalidInputError("form must be 'reduced' or 'consistent'")
    return float(np.inf if rate == 0 else 1.0 / rate)


def _window(traj: TdhfTrajectory, t_max: Optional[float], skip_zero: bool):
    t = traj.t
    mask = np.ones(t.size, bool) if t_max is None else t <= t_max
    if skip_zero:
        mask &= t > 0
    return t[mask], traj.y[mask]


def decoherence_time_numeric(traj: TdhfTrajectory, t_max: Optional[float] = None) -> float:
    """Decoherence time from the small-entropy growth rate.

    For small entropy the rate ``d ln S_S / dt`` reduces to the logarithmic
    rate of the mode ratio ``Y``. This fits ``ln Y`` against ``t`` on
    ``[0, t_max]``.
    """
    t, y = _window(traj, t_max, skip_zero=False)
    return entropy_timescale(t, y)


def local_decoherence_times(traj: TdhfTrajectory, t_max: Optional[float] = None):
    """``(t, tau(t))`` with ``tau = 1 / (d ln Y / dt)`` pointwise, ``t > 0``."""
    t, y = _window(traj, t_max, skip_zero=True)
    return t, local_timescale(t, y)
