"""Chaos diagnostics for the uncoupled system sector of the Gaussian flow.

The sector has two degrees of freedom: the mean field ``(phi, pi)`` and the
width pair ``(G, Sigma)``. With ``hbar > 0`` they exchange energy and the
flow can be chaotic. With ``hbar = 0`` the mean field moves classically in
one dimension and is always regular.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidInputError
from .numerics.ode import OdeProblem, integrate, jit_rhs, locate_events
from .numerics.spectral import dominant_lines, power_spectrum, spectral_entropy
from .tdhf import PotentialSpec, static_energy, static_minimum

__all__ = [
    "ClassifierThresholds",
    "LyapunovEstimate",
    "SectionResult",
    "SpectrumReport",
    "SweepConfig",
    "SweepRow",
    "calibrate_thresholds",
    "classify_spectrum",
    "closed_curve_residual",
    "density_diagonal_series",
    "energy_sweep",
    "lyapunov_exponent",
    "occupancy",
    "on_shell_state",
    "poincare_section",
    "system_energy",
    "system_trajectory",
]

log = logging.getLogger(__name__)

MIN_SERIES = 1024


@jit_rhs
def _system_rhs(t, y, p):
    mu, lam, hbar = p[0], p[1], p[2]
    q, pi, g, s = y[0], y[1], y[2], y[3]
    out = np.empty(4)
    out[0] = pi
    out[1] = mu * q - lam * q ** 3 / 6.0 - 0.5 * hbar * lam * q * g
    out[2] = 4.0 * s * g
    out[3] = -2.0 * s * s + 0.125 / (g * g) - 0.5 * (-mu + 0.5 * lam * q * q) - 0.25 * hbar * lam * g
    if hbar == 0.0:
        # widths carry no weight classically; keep them frozen
        out[2] = 0.0
        out[3] = 0.0
    return out


@jit_rhs
def _tangent_rhs(t, y, p):
    mu, lam, hbar = p[0], p[1], p[2]
    q, pi, g, s = y[0], y[1], y[2], y[3]
    dq, dp, dg, ds = y[4], y[5], y[6], y[7]
    out = np.empty(8)
    v2 = -mu + 0.5 * lam * q * q
    out[0] = pi
    out[1] = mu * q - lam * q ** 3 / 6.0 - 0.5 * hbar * lam * q * g
    out[2] = 4.0 * s * g
    out[3] = -2.0 * s * s + 0.125 / (g * g) - 0.5 * v2 - 0.25 * hbar * lam * g
    out[4] = dp
    out[5] = (-v2 - 0.5 * hbar * lam * g) * dq - 0.5 * hbar * lam * q * dg
    out[6] = 4.0 * s * dg + 4.0 * g * ds
    out[7] = -0.5 * lam * q * dq - (0.25 / g ** 3 + 0.25 * hbar * lam) * dg - 4.0 * s * ds
    if hbar == 0.0:
        out[2] = 0.0
        out[3] = 0.0
        out[6] = 0.0
        out[7] = 0.0
    return out


def system_energy(y, pot: PotentialSpec, hbar: float):
    """Energy of system-sector states ``(phi, pi, G, Sigma)`` (rows)."""
    y = np.atleast_2d(y)
    q, p, g, s = y[:, 0], y[:, 1], y[:, 2], y[:, 3]
    e = (0.5 * p ** 2 + pot.v(q) + hbar * (2.0 * s ** 2 * g + 0.125 / g + 0.5 * pot.d2(q) * g)
         + hbar ** 2 * pot.lam * g ** 2 / 8.0)
    return e


def _params(pot: PotentialSpec, hbar: float) -> np.ndarray:
    return np.array([pot.mu_sq, pot.lam, hbar], dtype=float)


def on_shell_state(pot: PotentialSpec, energy: float, hbar: float = 1.0,
                   width: Optional[float] = None) -> np.ndarray:
    """Deterministic initial state with the requested energy.

    The mean field sits at the left minimum of the static energy. ``Sigma``
    is 0 and ``G`` takes the static width. The momentum ``pi >= 0`` makes
    up the rest of the energy. For ``hbar = 0`` the classical minimum is
    used. ``G`` then defaults to the ``hbar = 1`` static width, which does
    not affect the mean field.

    Raises
    ------
    DomainError
        If ``energy`` lies below the static minimum.
    """
    if hbar > 0:
        _, phi, g = static_minimum(pot, hbar)
    else:
        phi = np.sqrt(max(6.0 * pot.mu_sq / pot.lam, 0.0)) if pot.lam > 0 else 0.0
        g = static_minimum(pot, 1.0)[2]
    if width is not None:
        g = width
    q0 = -phi
    e0 = float(static_energy(q0, g, pot, hbar))
    if energy < e0 - 1e-12:
        raise DomainError(f"energy {energy} is below the static minimum {e0}")
    return np.array([q0, np.sqrt(max(2.0 * (energy - e0), 0.0)), g, 0.0])


@dataclass
class SystemRun:
    """Uniformly sampled system-sector run, with Lyapunov data if requested."""

    t: np.ndarray
    states: np.ndarray
    energy: np.ndarray
    hbar: float
    log_growth: Optional[np.ndarray] = None
    renorm_times: Optional[np.ndarray] = None

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])) / max(abs(self.energy[0]), 1.0))


def system_trajectory(y0, pot: PotentialSpec, hbar: float, horizon: float,
                      dt_sample: float = 0.02, tangent: bool = False,
                      renorm: float = 5.0, rtol: float = 1e-11, atol: float = 1e-12,
                      seed: int = 0) -> SystemRun:
    """Integrate the system sector and sample it every ``dt_sample``.

    With ``tangent=True`` a tangent vector (random unit start from ``seed``)
    is carried along. It is renormalised every ``renorm`` time units, and
    the log growth factors are stored.
    """
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (4,) or not y0[2] > 0:
        raise InvalidInputError("state must be (phi, pi, G > 0, Sigma)")
    params = _params(pot, hbar)
    n = int(round(horizon / dt_sample))
    t_grid = np.arange(n + 1) * dt_sample
    if not tangent:
        traj = integrate(OdeProblem(_system_rhs, (0.0, t_grid[-1]), y0, rtol, atol, params))
        states = traj(t_grid)
        return SystemRun(t_grid, states, system_energy(states, pot, hbar), hbar)

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(4)
    if hbar == 0:
        v[2:] = 0.0
    y = np.concatenate([y0, v / np.linalg.norm(v)])
    states = np.empty((n + 1, 4))
    edges = np.arange(0.0, t_grid[-1], renorm)
    edges = np.append(edges, t_grid[-1])
    logs = np.empty(edges.size - 1)
    for i, (ta, tb) in enumerate(zip(edges[:-1], edges[1:])):
        traj = integrate(OdeProblem(_tangent_rhs, (ta, tb), y, rtol, atol, params))
        sel = (t_grid >= ta) & (t_grid <= tb)
        states[sel] = traj(t_grid[sel])[:, :4]
        y = traj.y[-1].copy()
        norm = np.linalg.norm(y[4:])
        logs[i] = np.log(norm)
        y[4:] /= norm
    return SystemRun(t_grid, states, system_energy(states, pot, hbar), hbar,
                     log_growth=logs, renorm_times=edges[1:])


@dataclass(frozen=True)
class LyapunovEstimate:
    """Largest exponent from the last third of the run, the whole-run
    average, and whether the two agree within 20 %."""

    value: float
    full_average: float
    converged: bool


def _lyapunov_from_logs(times, logs, floor: float = 1e-3) -> LyapunovEstimate:
    cum = np.cumsum(logs)
    total_t = times[-1]
    full = cum[-1] / total_t
    k = int(np.searchsorted(times, 2.0 * total_t / 3.0))
    k = min(max(k, 1), times.size - 1)
    last = (cum[-1] - cum[k - 1]) / (times[-1] - times[k - 1])
    converged = abs(last - full) <= 0.2 * abs(full) or max(abs(last), abs(full)) < floor
    return LyapunovEstimate(float(last), float(full), bool(converged))


def lyapunov_exponent(y0, pot: PotentialSpec, hbar: float = 1.0, horizon: float = 300.0,
                      renorm: float = 5.0, seed: int = 0) -> LyapunovEstimate:
    """Largest Lyapunov exponent by the renormalised-tangent method.

    The reported value is the growth rate over the last third of the
    horizon. That excludes the transient and the ``ln t / t`` tail left by
    merely polynomial divergence. For ``hbar = 0`` the widths are frozen
    and only the mean-field tangent is followed.
    """
    run = system_trajectory(y0, pot, hbar, horizon, dt_sample=horizon / 16,
                            tangent=True, renorm=renorm, seed=seed)
    return _lyapunov_from_logs(run.renorm_times, run.log_growth)


def density_diagonal_series(states, x_star: float = 0.0, hbar: float = 1.0,
                            classical_width: Optional[float] = None) -> np.ndarray:
    """``rho(x*, x*; t) = exp(-(x* - phi)^2 / (2 var)) / sqrt(2 pi var)``.

    ``var = hbar G``. For ``hbar = 0`` a fixed ``classical_width`` variance
    is used instead.
    """
    states = np.atleast_2d(states)
    if hbar > 0:
        var = hbar * states[:, 2]
    else:
        if classical_width is None:
            raise InvalidInputError("hbar = 0 needs an explicit classical_width")
        var = np.full(states.shape[0], classical_width)
    return np.exp(-(x_star - states[:, 0]) ** 2 / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)


@dataclass(frozen=True)
class ClassifierThresholds:
    """Normalised spectral-entropy thresholds (fraction of ``ln n_bins``).

    Defaults are the output of :func:`calibrate_thresholds` with seed 0,
    rounded and frozen.
    """

    regular_below: float = 0.482
    chaotic_above: float = 0.568

    def __post_init__(self):
        if not 0 <= self.regular_below <= self.chaotic_above <= 1:
            raise InvalidInputError("need 0 <= regular_below <= chaotic_above <= 1")


@dataclass
class SpectrumReport:
    frequencies: np.ndarray
    powers: np.ndarray
    spectral_entropy: float
    normalized_entropy: float
    dominant_lines: list
    classification: str


def classify_spectrum(series, dt: float = 1.0,
                      thresholds: ClassifierThresholds = ClassifierThresholds()) -> SpectrumReport:
    """Hann periodogram, spectral entropy and a regular/chaotic label.

    The label is ``"regular"`` below ``thresholds.regular_below`` (as a
    fraction of ``ln n_bins``), ``"chaotic"`` above
    ``thresholds.chaotic_above`` and ``"indeterminate"`` in between.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < MIN_SERIES:
        raise InvalidInputError(f"need at least {MIN_SERIES} samples")
    f, p = power_spectrum(x, dt)
    if not p.sum() > 0:
        # constant series: no dynamics at all
        return SpectrumReport(f, p, 0.0, 0.0, [], "regular")
    h = spectral_entropy(p)
    hn = h / np.log(p.size)
    if hn < thresholds.regular_below:
        label = "regular"
    elif hn > thresholds.chaotic_above:
        label = "chaotic"
    else:
        label = "indeterminate"
    return SpectrumReport(f, p, h, hn, dominant_lines(f, p), label)


def calibrate_thresholds(seed: int = 0, n: int = 16384, trials: int = 8,
                         lower: float = 0.45, upper: float = 0.55) -> ClassifierThresholds:
    """Place the thresholds between a sinusoid and seeded white noise.

    With ``h_line`` and ``h_noise`` the two normalised entropies, the
    thresholds sit at ``h_line + lower (h_noise - h_line)`` and
    ``h_line + upper (h_noise - h_line)``.
    """
    t = np.arange(n)
    _, p = power_spectrum(np.sin(2 * np.pi * 0.0123456 * t))
    h_line = spectral_entropy(p, normalized=True)
    rng = np.random.default_rng(seed)
    h_noise = np.mean([spectral_entropy(power_spectrum(rng.standard_normal(n))[1], normalized=True)
                       for _ in range(trials)])
    span = h_noise - h_line
    return ClassifierThresholds(h_line + lower * span, h_line + upper * span)


@dataclass
class SectionResult:
    points: np.ndarray
    times: np.ndarray
    energy_error: float
    complete: bool


def _section_event(kind: str, params):
    if kind == "sigma_zero":
        return lambda t, y: y[..., 3]
    if kind == "g_extremum":
        # dG/dt = 4 Sigma G; with G > 0 its sign is that of Sigma
        return lambda t, y: y[..., 3] * y[..., 2]
    raise InvalidInputError(f"unknown section surface {kind!r}")


def poincare_section(y0, pot: PotentialSpec, hbar: float = 1.0, n_crossings: int = 500,
                     surface: str = "sigma_zero", direction: int = 1, event=None,
                     max_time: float = 5000.0, rtol: float = 1e-11, atol: float = 1e-12,
                     chunk: float = 200.0) -> SectionResult:
    """``(phi, pi)`` at the first ``n_crossings`` directed surface crossings.

    ``surface="custom"`` uses the callable ``event(t, y)`` (vectorised over
    rows of ``y``). A result with fewer points than requested has
    ``complete=False``.
    """
    if direction not in (-1, 1):
        raise InvalidInputError("direction must be +1 or -1")
    fn = event if surface == "custom" else _section_event(surface, None)
    if fn is None:
        raise InvalidInputError("custom surface needs an event function")
    params = _params(pot, hbar)
    y = np.asarray(y0, dtype=float).copy()
    e0 = float(system_energy(y, pot, hbar)[0])
    pts, times = [], []
    t = 0.0
    while len(pts) < n_crossings and t < max_time:
        t1 = min(t + chunk, max_time)
        traj = integrate(OdeProblem(_system_rhs, (t, t1), y, rtol, atol, params))
        for tc, yc in locate_events(traj, fn, direction, vectorized=True, substeps=4):
            if tc > 0 and len(pts) < n_crossings:
                pts.append(yc.copy())
                times.append(tc)
        y = traj.y[-1].copy()
        t = t1
    states = np.array(pts).reshape(-1, 4)
    err = 0.0
    if states.size:
        err = float(np.max(np.abs(system_energy(states, pot, hbar) - e0)) / max(abs(e0), 1.0))
    complete = len(pts) >= n_crossings
    if not complete:
        log.info("section incomplete: %d of %d crossings", len(pts), n_crossings)
    return SectionResult(states[:, :2], np.array(times), err, complete)


def occupancy(points, bins: int = 50, bounds=None) -> int:
    """Number of cells of a ``bins x bins`` grid visited by the points.

    The grid spans ``bounds = ((x0, x1), (y0, y1))``, by default the
    bounding box of the points.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return 0
    if bounds is None:
        bounds = ((pts[:, 0].min(), pts[:, 0].max()), (pts[:, 1].min(), pts[:, 1].max()))
    h, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=bins, range=bounds)
    return int(np.count_nonzero(h))


def closed_curve_residual(points) -> float:
    """Distance of points from their best-fit conic, relative to the curve
    diameter.

    The conic ``a x^2 + b xy + c y^2 + d x + e y = 1`` is fitted by least
    squares on centred, scaled coordinates. The distance is the first-order
    estimate ``|f| / |grad f|``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 6:
        raise InvalidInputError("need at least 6 points to fit a conic")
    c = pts.mean(axis=0)
    scale = np.max(np.ptp(pts, axis=0))
    x, y = ((pts - c) / scale).T
    a = np.column_stack([x * x, x * y, y * y, x, y])
    coef, *_ = np.linalg.lstsq(a, np.ones_like(x), rcond=None)
    f = a @ coef - 1.0
    gx = 2 * coef[0] * x + coef[1] * y + coef[3]
    gy = coef[1] * x + 2 * coef[2] * y + coef[4]
    dist = np.abs(f) / np.hypot(gx, gy)
    return float(np.max(dist))


@dataclass
class SweepRow:
    energy: float
    spectral_entropy: float = float("nan")
    normalized_entropy: float = float("nan")
    lyapunov: float = float("nan")
    lyapunov_converged: bool = False
    label: str = "failed"
    lyapunov_label: str = "failed"
    energy_drift: float = float("nan")
    error: str = ""
    spectrum: Optional[tuple] = field(default=None, repr=False)


@dataclass(frozen=True)
class SweepConfig:
    """Settings shared by all rows of an energy sweep."""

    pot: PotentialSpec
    hbar: float = 1.0
    horizon: float = 830.0
    dt_sample: float = 0.05
    renorm: float = 5.0
    x_star: float = 0.0
    lyapunov_threshold: float = 0.05
    thresholds: ClassifierThresholds = ClassifierThresholds()
    seed: int = 0
    keep_spectrum: bool = False


def _sweep_row(args) -> SweepRow:
    energy, cfg = args
    row = SweepRow(energy=float(energy))
    try:
        y0 = on_shell_state(cfg.pot, energy, cfg.hbar)
        run = system_trajectory(y0, cfg.pot, cfg.hbar, cfg.horizon, cfg.dt_sample,
                                tangent=True, renorm=cfg.renorm, seed=cfg.seed)
        row.energy_drift = run.energy_drift
        lyap = _lyapunov_from_logs(run.renorm_times, run.log_growth)
        row.lyapunov, row.lyapunov_converged = lyap.value, lyap.converged
        row.lyapunov_label = "chaotic" if lyap.value > cfg.lyapunov_threshold else "regular"
        series = density_diagonal_series(run.states, cfg.x_star, cfg.hbar,
                                         classical_width=None if cfg.hbar > 0 else y0[2])
        n = 2 ** int(np.floor(np.log2(series.size)))
        rep = classify_spectrum(series[-n:], cfg.dt_sample, cfg.thresholds)
        row.spectral_entropy = rep.spectral_entropy
        row.normalized_entropy = rep.normalized_entropy
        row.label = rep.classification
        if cfg.keep_spectrum:
            row.spectrum = (rep.frequencies, rep.powers)
    except Exception as exc:  # rows fail independently
        row.error = f"{type(exc).__name__}: {exc}"
        log.info("sweep row E=%s failed: %s", energy, row.error)
    return row


def energy_sweep(energies: Sequence[float], config: SweepConfig,
                 workers: int = 1) -> list[SweepRow]:
    """One diagnostic row per energy; failures are recorded, not raised."""
    jobs = [(float(e), config) for e in energies]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_row, jobs))
    return [_sweep_row(j) for j in jobs]
