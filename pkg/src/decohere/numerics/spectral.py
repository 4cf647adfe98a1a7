"""Periodograms, spectral entropy and line detection for time series."""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.signal import find_peaks
from scipy.special import xlogy

from ..errors import InvalidInputError

__all__ = ["dominant_lines", "power_spectrum", "spectral_entropy", "uniform_step"]

MIN_SAMPLES = 16


def uniform_step(times, rtol: float = 1e-9) -> float:
    """Sampling interval of a uniform time grid; raises if not uniform."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise InvalidInputError("need at least two timestamps")
    d = np.diff(times)
    dt = (times[-1] - times[0]) / (times.size - 1)
    if dt <= 0 or np.max(np.abs(d - dt)) > rtol * max(abs(dt), np.max(np.abs(times))):
        raise InvalidInputError("timestamps are not uniformly spaced")
    return float(dt)


def power_spectrum(series, dt: float = 1.0, *, times=None,
                   window: Optional[str] = "hann"):
    """One-sided periodogram of a uniformly sampled real series.

    The mean is removed first. With ``window="hann"`` the series is tapered
    by a Hann window and the powers are rescaled so that they sum to the
    variance of the untapered series; with ``window=None`` the raw
    periodogram already satisfies Parseval's identity.

    Parameters
    ----------
    series : array_like
        At least 16 samples.
    dt : float
        Sampling interval, ignored when ``times`` is given.
    times : array_like, optional
        Timestamps; must be uniformly spaced.

    Returns
    -------
    freqs, powers : ndarray
        Frequencies in cycles per unit time and the power per bin.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < MIN_SAMPLES:
        raise InvalidInputError(f"need a 1-D series of at least {MIN_SAMPLES} samples")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("series has non-finite samples")
    if times is not None:
        if len(times) != x.size:
            raise InvalidInputError("times and series lengths differ")
        dt = uniform_step(times)
    if not dt > 0:
        raise InvalidInputError("sampling interval must be positive")
    n = x.size
    x = x - x.mean()
    variance = float(np.mean(x ** 2))
    if window == "hann":
        xw = x * np.hanning(n)
    elif window is None:
        xw = x
    else:
        raise InvalidInputError(f"unknown window {window!r}")
    spec = np.fft.rfft(xw)
    p = np.abs(spec) ** 2 / n ** 2
    # fold negative frequencies; DC and (even n) Nyquist appear once
    p[1:] *= 2.0
    if n % 2 == 0:
        p[-1] /= 2.0
    if window is not None:
        total = p.sum()
        p = p * (variance / total) if total > 0 else p
    return np.fft.rfftfreq(n, dt), p


def spectral_entropy(powers, normalized: bool = False) -> float:
    """Shannon entropy of the normalised power distribution.

    With ``normalized=True`` the result is divided by ``ln(n_bins)`` so a
    flat spectrum gives 1.
    """
    p = np.asarray(powers, dtype=float)
    total = p.sum()
    if p.size < 2 or not total > 0:
        raise InvalidInputError("need at least two bins with positive total power")
    q = p / total
    h = float(-np.sum(xlogy(q, q)))
    return h / np.log(p.size) if normalized else h


def dominant_lines(freqs, powers, rel_threshold: float = 0.01, lobe: int = 2):
    """Spectral lines carrying at least ``rel_threshold`` of the total power.

    A line is a local maximum; its power is summed over ``+-lobe`` bins to
    absorb the taper's main lobe. Lines are returned strongest first as
    ``(frequency, fraction_of_total_power)`` pairs.
    """
    f = np.asarray(freqs, dtype=float)
    p = np.asarray(powers, dtype=float)
    total = p.sum()
    if not total > 0:
        return []
    padded = np.concatenate([[-np.inf], p, [-np.inf]])
    peaks, _ = find_peaks(padded)
    peaks = peaks - 1
    lines = []
    for k in peaks:
        lo, hi = max(k - lobe, 0), min(k + lobe + 1, p.size)
        frac = p[lo:hi].sum() / total
        if frac >= rel_threshold:
            lines.append((float(f[k]), float(frac)))
    lines.sort(key=lambda item: -item[1])
    return lines
