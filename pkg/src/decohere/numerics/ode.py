"""Dormand-Prince 5(4) integrator with dense output and event location.

The stepping loop is written once, in plain numpy, and used two ways: called
directly for ordinary Python right-hand sides, or compiled with numba when the
right-hand side is itself a numba-jitted function ``f(t, y, params)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numba
import numpy as np
from numba import types as nbt
from numba.core.registry import CPUDispatcher

__all__ = [
    "IntegrationError",
    "OdeProblem",
    "Trajectory",
    "integrate",
    "jit_rhs",
    "locate_events",
    "sign_flips",
]

# Dormand-Prince 5(4) tableau with the continuous extension coefficients.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (
    19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
    -5103.0 / 18656.0)
_A71, _A73, _A74, _A75, _A76 = (
    35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
    11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0,
    22.0 / 525.0, -1.0 / 40.0)
_D1, _D3, _D4, _D5, _D6, _D7 = (
    -12715105075.0 / 11282082432.0, 87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0, 701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0, 69997945.0 / 29380423.0)

_OK, _NONFINITE, _UNDERFLOW, _MAXSTEPS = 0, 1, 2, 3
_STATUS_TEXT = {
    _OK: "success",
    _NONFINITE: "right-hand side returned a non-finite value",
    _UNDERFLOW: "step size underflow",
    _MAXSTEPS: "maximum number of steps exceeded",
}


class IntegrationError(RuntimeError):
    """Raised when the integrator cannot continue.

    ``t_last`` is the last time at which the solution was accepted.
    """

    def __init__(self, message: str, t_last: float):
        super().__init__(f"{message} (last good t = {t_last!r})")
        self.t_last = t_last


def _dopri_core(fun, t0, y0, t1, params, rtol, atol, h_init, h_max, fixed,
                max_steps, keep_dense):
    n = y0.shape[0]
    cap = 256
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    dense = np.empty((cap if keep_dense else 1, 5, n))
    ts[0] = t0
    ys[0] = y0
    count = 1

    t = t0
    y = y0.copy()
    k1 = fun(t, y, params)
    nfev = 1
    if not np.all(np.isfinite(k1)):
        return _NONFINITE, ts[:1], ys[:1], dense[:0], nfev

    span = t1 - t0
    if fixed > 0.0:
        h = fixed
    elif h_init > 0.0:
        h = h_init
    else:
        # standard starting-step heuristic
        sc = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean((y / sc) ** 2))
        d1 = np.sqrt(np.mean((k1 / sc) ** 2))
        if d0 < 1e-5 or d1 < 1e-5:
            h = 1e-6
        else:
            h = 0.01 * d0 / d1
        h = min(h, span)
        y_probe = y + h * k1
        k_probe = fun(t + h, y_probe, params)
        nfev += 1
        d2 = np.sqrt(np.mean(((k_probe - k1) / sc) ** 2)) / h
        dmax = max(d1, d2)
        if dmax <= 1e-15:
            h2 = max(1e-6, h * 1e-3)
        else:
            h2 = (0.01 / dmax) ** 0.2
        h = min(100.0 * h, h2, span)
    h = min(h, h_max)

    reject = False
    steps = 0
    while t < t1:
        if steps >= max_steps:
            return _MAXSTEPS, ts[:count], ys[:count], dense[:count - 1], nfev
        if t + h >= t1 or t + 1.01 * h >= t1:
            h = t1 - t
        if h <= 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0):
            return _UNDERFLOW, ts[:count], ys[:count], dense[:count - 1], nfev

        k2 = fun(t + _C2 * h, y + h * (_A21 * k1), params)
        k3 = fun(t + _C3 * h, y + h * (_A31 * k1 + _A32 * k2), params)
        k4 = fun(t + _C4 * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3),
                 params)
        k5 = fun(t + _C5 * h,
                 y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4),
                 params)
        k6 = fun(t + h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3
                                 + _A64 * k4 + _A65 * k5), params)
        y_new = y + h * (_A71 * k1 + _A73 * k3 + _A74 * k4 + _A75 * k5
                         + _A76 * k6)
        k7 = fun(t + h, y_new, params)
        nfev += 6
        steps += 1

        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(k7))):
            if fixed > 0.0:
                return (_NONFINITE, ts[:count], ys[:count], dense[:count - 1],
                        nfev)
            # Could be a step that overshot into a singular region; shrink.
            h *= 0.25
            reject = True
            continue

        if fixed > 0.0:
            accept = True
            factor = 1.0
        else:
            err_vec = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5
                           + _E6 * k6 + _E7 * k7)
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = np.sqrt(np.mean((err_vec / sc) ** 2))
            accept = err <= 1.0
            if err == 0.0:
                factor = 10.0
            else:
                factor = min(10.0, max(0.2, 0.9 * err ** -0.2))
            if reject:
                factor = min(factor, 1.0)

        if not accept:
            h *= factor
            reject = True
            continue

        if count >= cap:
            cap *= 2
            ts_new = np.empty(cap)
            ts_new[:count] = ts[:count]
            ts = ts_new
            ys_new = np.empty((cap, n))
            ys_new[:count] = ys[:count]
            ys = ys_new
            if keep_dense:
                dense_new = np.empty((cap, 5, n))
                dense_new[:count - 1] = dense[:count - 1]
                dense = dense_new

        if keep_dense:
            ydiff = y_new - y
            bspl = h * k1 - ydiff
            dense[count - 1, 0] = y
            dense[count - 1, 1] = ydiff
            dense[count - 1, 2] = bspl
            dense[count - 1, 3] = ydiff - h * k7 - bspl
            dense[count - 1, 4] = h * (_D1 * k1 + _D3 * k3 + _D4 * k4
                                       + _D5 * k5 + _D6 * k6 + _D7 * k7)

        t = t + h
        if t1 - t < 1e-14 * max(abs(t1), 1.0):
            t = t1
        y = y_new
        k1 = k7
        ts[count] = t
        ys[count] = y
        count += 1
        reject = False
        if fixed <= 0.0:
            h = min(h * factor, h_max)
        else:
            h = fixed

    return _OK, ts[:count], ys[:count], dense[:max(count - 1, 0)], nfev


RHS_SIGNATURE = nbt.float64[::1](nbt.float64, nbt.float64[::1],
                                  nbt.float64[::1])
#: Decorator for right-hand sides that take the compiled fast path.
jit_rhs = numba.njit(RHS_SIGNATURE, cache=True)

_core_compiled = None


def _jit_core():
    # Compiled against the first-class function type so one cached binary
    # serves every right-hand side with RHS_SIGNATURE.
    global _core_compiled
    if _core_compiled is None:
        arr = nbt.float64[::1]
        f64 = nbt.float64
        sig = (nbt.FunctionType(RHS_SIGNATURE), f64, arr, f64, arr, f64, f64,
               f64, f64, f64, nbt.int64, nbt.boolean)
        _core_compiled = numba.njit(sig, cache=True)(_dopri_core)
    return _core_compiled


@dataclass
class OdeProblem:
    """An initial-value problem ``dy/dt = fun(t, y[, params])``.

    ``fun`` is either a Python callable ``fun(t, y)`` or a function decorated
    with :data:`jit_rhs`, called as ``fun(t, y, params)`` with a float64
    parameter array.
    """

    fun: Callable
    t_span: tuple[float, float]
    y0: np.ndarray
    rtol: float = 1e-9
    atol: float = 1e-12
    params: Optional[np.ndarray] = None

    def __post_init__(self):
        self.y0 = np.atleast_1d(np.asarray(self.y0, dtype=float)).copy()
        if self.y0.ndim != 1 or self.y0.size < 1:
            raise ValueError("y0 must be a non-empty 1-D vector")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        t0, t1 = map(float, self.t_span)
        if not t1 >= t0:
            raise ValueError("t_span must be increasing")
        self.t_span = (t0, t1)
        if self.params is None:
            self.params = np.zeros(0)
        self.params = np.asarray(self.params, dtype=float)

    @property
    def dimension(self) -> int:
        return self.y0.size


@dataclass
class Trajectory:
    """Accepted integrator steps plus the DOPRI5 continuous extension.

    Calling the trajectory with a time (or array of times) inside the span
    evaluates the 4th-order dense output.
    """

    t: np.ndarray
    y: np.ndarray
    dense: np.ndarray = field(repr=False)
    nfev: int = 0

    def __call__(self, tq):
        tq = np.asarray(tq, dtype=float)
        scalar = tq.ndim == 0
        tq = np.atleast_1d(tq)
        if self.dense.shape[0] == 0:
            if self.t.size == 1 and np.all(tq == self.t[0]):
                out = np.repeat(self.y[:1], tq.size, axis=0)
                return out[0] if scalar else out
            raise ValueError("trajectory was integrated without dense output")
        lo, hi = self.t[0], self.t[-1]
        tol = 1e-12 * max(1.0, abs(hi))
        if np.any(tq < lo - tol) or np.any(tq > hi + tol):
            raise ValueError("requested time outside the integrated span")
        idx = np.clip(np.searchsorted(self.t, tq, side="right") - 1, 0,
                      self.dense.shape[0] - 1)
        h = self.t[idx + 1] - self.t[idx]
        theta = ((tq - self.t[idx]) / h)[:, None]
        r = self.dense[idx]
        th1 = 1.0 - theta
        out = r[:, 0] + theta * (r[:, 1] + th1 * (r[:, 2] + theta
                                                 * (r[:, 3] + th1 * r[:, 4])))
        return out[0] if scalar else out

    @property
    def t_span(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    def resample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Uniform grid of ``n`` points over the span and the states on it."""
        grid = np.linspace(self.t[0], self.t[-1], n)
        return grid, self(grid)


def integrate(problem: OdeProblem, *, first_step: float = 0.0,
              max_step: float = np.inf, fixed_step: float = 0.0,
              max_steps: int = 50_000_000, dense: bool = True) -> Trajectory:
    """Integrate ``problem`` with the Dormand-Prince 5(4) pair.

    Parameters
    ----------
    problem : OdeProblem
    first_step : float, optional
        Initial step; chosen automatically when 0.
    max_step : float, optional
    fixed_step : float, optional
        If positive, take steps of exactly this size with no error control
        (used for convergence-order checks).
    max_steps : int, optional
    dense : bool, optional
        Keep the continuous-extension coefficients (needed for event location
        and resampling).

    Returns
    -------
    Trajectory

    Raises
    ------
    IntegrationError
        On a non-finite right-hand side, step-size underflow or exceeding
        ``max_steps``.
    """
    t0, t1 = problem.t_span
    fun = problem.fun
    if isinstance(fun, CPUDispatcher):
        if RHS_SIGNATURE.args not in fun.signatures:
            raise TypeError("jitted right-hand sides must be built with jit_rhs")
        core, f = _jit_core(), fun
    else:
        core = _dopri_core

        def f(t, y, params, _fun=fun):
            return np.asarray(_fun(t, y), dtype=float)

    status, ts, ys, dn, nfev = core(
        f, t0, np.ascontiguousarray(problem.y0), t1,
        np.ascontiguousarray(problem.params), float(problem.rtol),
        float(problem.atol), float(first_step), float(max_step),
        float(fixed_step), int(max_steps), bool(dense))
    if status != _OK:
        raise IntegrationError(_STATUS_TEXT[status], float(ts[-1]))
    return Trajectory(t=ts.copy(), y=ys.copy(), dense=dn.copy(), nfev=int(nfev))


def _bisect(traj: Trajectory, event, ta, tb, ga, xtol):
    while tb - ta > xtol:
        tm = 0.5 * (ta + tb)
        gm = event(tm, traj(tm))
        if gm == 0.0:
            return tm
        if (gm > 0) == (ga > 0):
            ta, ga = tm, gm
        else:
            tb = tm
    return 0.5 * (ta + tb)


def locate_events(traj: Trajectory, event: Callable, direction: int = 0,
                  xtol: Optional[float] = None, vectorized: bool = False,
                  substeps: int = 1) -> list[tuple[float, np.ndarray]]:
    """Zero crossings of ``event(t, y)`` along a dense trajectory.

    Sign changes between consecutive samples are refined by bisection on the
    dense output. Samples are the accepted steps, each split into
    ``substeps`` equal parts. ``direction=+1`` keeps rising crossings only,
    ``-1`` falling ones, ``0`` both. With ``vectorized=True`` the event is
    first evaluated as ``event(t_array, y_array)`` on all steps at once.

    A zero crossing that falls exactly on a stored step is reported once.
    Crossings where the function touches zero between two steps of equal
    sign are not detected.
    """
    if direction not in (-1, 0, 1):
        raise ValueError("direction must be -1, 0 or +1")
    t0, t1 = traj.t_span
    if xtol is None:
        xtol = 1e-10 * max(t1 - t0, np.finfo(float).tiny)
    if substeps > 1 and traj.t.size > 1:
        frac = np.arange(substeps) / substeps
        ts = (traj.t[:-1, None] + np.diff(traj.t)[:, None] * frac).ravel()
        ts = np.append(ts, traj.t[-1])
        ys = traj(ts)
    else:
        ts, ys = traj.t, traj.y
    if vectorized:
        g = np.asarray(event(ts, ys), dtype=float)
    else:
        g = np.array([event(t, y) for t, y in zip(ts, ys)], dtype=float)

    out = []
    for i in range(g.size - 1):
        ga, gb = g[i], g[i + 1]
        if ga == 0.0:
            continue
        if gb == 0.0:
            rising = ga < 0
            if direction == 0 or (direction > 0) == rising:
                out.append((float(ts[i + 1]), ys[i + 1].copy()))
            continue
        if (ga > 0) == (gb > 0):
            continue
        rising = gb > 0
        if direction != 0 and (direction > 0) != rising:
            continue
        tc = _bisect(traj, event, ts[i], ts[i + 1], ga, xtol)
        out.append((float(tc), traj(tc)))
    return out


def sign_flips(values: Sequence[float]) -> int:
    """Number of sign changes in a sequence (zeros skipped)."""
    v = np.asarray(values, dtype=float)
    v = v[v != 0]
    return int(np.count_nonzero(np.diff(np.sign(v)) != 0))
