"""Finite-record spectral analysis.

The Bohr mean of an almost-periodic function is approximated by the plain
arithmetic mean over the record, without any window. For a harmonic whose
frequency is commensurate with the record (``omega = 2*pi*k/T``) the
approximation is exact.

Complex convention: ``S(omega) = mean(z * exp(-j*omega*t))``, so that
``a*cos(omega t) + b*sin(omega t)`` has ``S = (a - jb)/2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .apsignal import TimeSeries
from .errors import GridTooCoarse
from .freqalg import FrequencySet, merge_close, resolution

__all__ = [
    "Spectrum",
    "FourierExponentPair",
    "mean_power",
    "fourier_exponent",
    "fourier_exponents",
    "amplitude_spectrum",
    "find_peaks",
    "fit_harmonics",
    "refine_frequencies",
]

_CHUNK_ELEMS = 2_000_000


@dataclass(frozen=True)
class Spectrum:
    grid: np.ndarray
    values: np.ndarray
    source_duration: float

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if g.shape != v.shape:
            raise ValueError("grid and values must have the same length")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def amplitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def delta(self) -> float:
        return resolution(self.source_duration)


@dataclass(frozen=True)
class FourierExponentPair:
    """Input and output Fourier exponents of one channel at one frequency."""

    omega: float
    s_in: complex
    s_out: complex


def mean_power(ts: TimeSeries) -> float:
    return float(np.mean(ts.samples**2))


def fourier_exponents(ts: TimeSeries, omegas) -> np.ndarray:
    """``fourier_exponent`` at many frequencies, chunked to bound memory."""
    w = np.atleast_1d(np.asarray(omegas, dtype=float))
    t = ts.times
    n = t.size
    out = np.empty(w.size, dtype=complex)
    step = max(1, _CHUNK_ELEMS // n)
    for lo in range(0, w.size, step):
        hi = min(lo + step, w.size)
        phase = np.exp(-1j * np.outer(w[lo:hi], t))
        out[lo:hi] = phase @ ts.samples / n
    return out


def fourier_exponent(ts: TimeSeries, omega: float) -> complex:
    if not omega > 0:
        raise ValueError(f"omega must be > 0, got {omega}")
    return complex(fourier_exponents(ts, [omega])[0])


def amplitude_spectrum(ts: TimeSeries, omega_min: float, omega_max: float, step: float) -> Spectrum:
    """Fourier exponents on the grid ``omega_min, omega_min + step, ... <= omega_max``.

    The step must not exceed a quarter of the record resolution; a coarser
    grid can straddle the main lobe of a harmonic and lose it.
    """
    if not 0 < omega_min < omega_max:
        raise ValueError("need 0 < omega_min < omega_max")
    delta = resolution(ts.duration)
    if step <= 0:
        raise ValueError("step must be > 0")
    if step > delta / 4 * (1 + 1e-12):
        raise GridTooCoarse(f"grid step {step:g} exceeds delta/4 = {delta / 4:g}")
    count = int(np.floor((omega_max - omega_min) / step * (1 + 1e-12))) + 1
    grid = omega_min + step * np.arange(count)
    return Spectrum(grid, fourier_exponents(ts, grid), ts.duration)


def _parabolic_vertex(ym1: float, y0: float, yp1: float) -> float:
    """Offset (in grid steps) of the vertex through three equally spaced points."""
    denom = ym1 - 2 * y0 + yp1
    if denom >= 0:
        return 0.0
    return 0.5 * (ym1 - yp1) / denom


def find_peaks(spec: Spectrum, rel_threshold: float = 0.05) -> FrequencySet:
    """Local maxima of the amplitude spectrum, refined on the log scale.

    Only strict interior maxima at or above ``rel_threshold`` times the
    largest amplitude count. Maxima closer than the record resolution are
    merged, the stronger one surviving.
    """
    if not 0 < rel_threshold < 1:
        raise ValueError("rel_threshold must lie in (0, 1)")
    delta = spec.delta
    amp = spec.amplitude
    if amp.size < 3 or not np.any(amp > 0):
        return FrequencySet(np.empty(0), delta)
    top = amp.max()
    mid = amp[1:-1]
    is_peak = (mid > amp[:-2]) & (mid > amp[2:]) & (mid >= rel_threshold * top)
    idx = np.flatnonzero(is_peak) + 1
    h = spec.grid[1] - spec.grid[0]
    freqs, heights = [], []
    for k in idx:
        trio = amp[k - 1 : k + 2]
        shift = 0.0
        if np.all(trio > 0):
            shift = _parabolic_vertex(*np.log(trio))
        freqs.append(spec.grid[k] + shift * h)
        heights.append(amp[k])
    return merge_close(freqs, delta, heights)


def _design(t: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    wt = np.outer(t, freqs)
    return np.hstack([np.ones((t.size, 1)), np.cos(wt), np.sin(wt)])


def fit_harmonics(ts: TimeSeries, freqs) -> tuple[float, np.ndarray, np.ndarray]:
    """Least-squares ``offset, a, b`` of a trigonometric sum at fixed frequencies."""
    w = np.asarray(freqs, dtype=float).reshape(-1)
    coef, *_ = np.linalg.lstsq(_design(ts.times, w), ts.samples, rcond=None)
    m = w.size
    return float(coef[0]), coef[1 : m + 1], coef[m + 1 :]


def _prune(ts, w, rel_threshold):
    """Drop fitted components weaker than ``rel_threshold`` of the strongest."""
    while w.size:
        _, a, b = fit_harmonics(ts, w)
        amp = np.hypot(a, b)
        keep = amp >= rel_threshold * amp.max()
        if keep.all():
            return w, amp
        w = w[keep]
    return w, np.empty(0)


def _polish(ts: TimeSeries, w0: np.ndarray) -> np.ndarray:
    t = ts.times
    z = ts.samples
    m = w0.size
    c0, a0, b0 = fit_harmonics(ts, w0)
    # time origin at the record centre decorrelates phase and frequency
    tc = t - t.mean()
    shift = w0 * t.mean()
    # rewrite the linear coefficients for the centred clock
    ca, sa = np.cos(shift), np.sin(shift)
    a0c = a0 * ca + b0 * sa
    b0c = -a0 * sa + b0 * ca
    x0 = np.concatenate([[c0], a0c, b0c, w0])

    def unpack(x):
        return x[0], x[1 : m + 1], x[m + 1 : 2 * m + 1], x[2 * m + 1 :]

    def resid(x):
        c, a, b, w = unpack(x)
        wt = np.outer(tc, w)
        return c + np.cos(wt) @ a + np.sin(wt) @ b - z

    def jac(x):
        _, a, b, w = unpack(x)
        wt = np.outer(tc, w)
        cw, sw = np.cos(wt), np.sin(wt)
        dw = tc[:, None] * (-sw * a + cw * b)
        return np.hstack([np.ones((tc.size, 1)), cw, sw, dw])

    sol = least_squares(resid, x0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=200 * (x0.size + 1))
    w = unpack(sol.x)[3]
    delta = resolution(ts.duration)
    # a component that ran away is not trusted; keep its starting point
    wild = ~np.isfinite(w) | (np.abs(w - w0) > delta / 2) | (w <= 0)
    return np.where(wild, w0, w)


def refine_frequencies(ts: TimeSeries, fset: FrequencySet, rel_threshold: float = 0.05,
                       max_rounds: int = 5) -> FrequencySet:
    """Sharpen peak frequencies by a joint sinusoidal least-squares fit.

    Spectral peak positions are biased by the leakage tails of neighbouring
    harmonics, and the rectangular-window sidelobes of strong harmonics
    show up as extra local maxima. Both are cleaned up here: components
    whose fitted amplitude is below ``rel_threshold`` of the strongest are
    dropped, and the surviving frequencies are adjusted jointly so that the
    trigonometric sum reproduces the record in the least-squares sense.
    """
    w = np.asarray(fset.freqs, dtype=float)
    amp = np.empty(0)
    for _ in range(max_rounds):
        w, amp = _prune(ts, w, rel_threshold)
        if not w.size:
            break
        w = _polish(ts, w)
        order = np.argsort(w)
        w = w[order]
        w_after, amp = _prune(ts, w, rel_threshold)
        if w_after.size == w.size:
            break
        w = w_after
    return merge_close(w, fset.delta, amp if amp.size == w.size else None)
