"""Almost-periodic signals: a constant plus a finite sum of sinusoids.

Everything synthetic in the package (clean inputs, channel outputs, noise,
coupling terms shared between inputs) is built from :class:`APSignal`
values and sampled into :class:`TimeSeries` records.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CouplingCollision

__all__ = [
    "Harmonic",
    "APSignal",
    "TimeSeries",
    "NoiseModel",
    "CouplingSpec",
    "merge",
    "evaluate",
    "synthesize",
    "apply_noise",
    "make_coupled_inputs",
]

# frequencies closer than this (relative) are one basis element
_SAME_FREQ_RTOL = 1e-12


@dataclass(frozen=True)
class Harmonic:
    """``a*cos(omega*t) + b*sin(omega*t)``."""

    omega: float
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.omega) or self.omega <= 0:
            raise ValueError(f"harmonic frequency must be finite and > 0, got {self.omega}")
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("harmonic amplitudes must be finite")

    @property
    def amplitude(self) -> float:
        return float(np.hypot(self.a, self.b))

    @property
    def exponent(self) -> complex:
        """Mean projection onto ``exp(j*omega*t)``, i.e. ``(a - jb)/2``."""
        return complex(self.a, -self.b) / 2

    @classmethod
    def from_exponent(cls, omega: float, s: complex) -> "Harmonic":
        return cls(float(omega), 2.0 * s.real, -2.0 * s.imag)


def _same_freq(w1: float, w2: float) -> bool:
    return abs(w1 - w2) <= _SAME_FREQ_RTOL * max(abs(w1), abs(w2))


@dataclass(frozen=True)
class APSignal:
    """Finite trigonometric sum ``offset + sum_l a_l cos(w_l t) + b_l sin(w_l t)``.

    Harmonics must be given in strictly increasing frequency order; use
    :meth:`from_terms` or :func:`merge` to build a signal from an unordered
    or overlapping list.
    """

    harmonics: tuple[Harmonic, ...] = ()
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "harmonics", tuple(self.harmonics))
        if not np.isfinite(self.offset):
            raise ValueError("offset must be finite")
        ws = [h.omega for h in self.harmonics]
        for w1, w2 in zip(ws, ws[1:]):
            if w2 <= w1 or _same_freq(w1, w2):
                raise ValueError(
                    f"harmonic frequencies must be strictly increasing and distinct, got {w1} then {w2}"
                )

    @classmethod
    def from_terms(cls, terms: Iterable, offset: float = 0.0) -> "APSignal":
        """Build from ``Harmonic`` objects or ``(omega, a, b)`` triples in any order."""
        hs = [t if isinstance(t, Harmonic) else Harmonic(*map(float, t)) for t in terms]
        return merge(cls(offset=offset), _unsorted=hs)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([h.omega for h in self.harmonics], dtype=float)

    def __len__(self):
        return len(self.harmonics)

    def __call__(self, t):
        return evaluate(self, t)

    def scaled(self, alpha: float) -> "APSignal":
        return APSignal(
            tuple(Harmonic(h.omega, alpha * h.a, alpha * h.b) for h in self.harmonics),
            alpha * self.offset,
        )

    def __add__(self, other: "APSignal") -> "APSignal":
        return merge(self, other)

    def mean_power(self) -> float:
        """Bohr mean of the square: ``offset**2 + sum (a**2 + b**2)/2``."""
        return self.offset**2 + sum((h.a**2 + h.b**2) / 2 for h in self.harmonics)


def merge(*signals: APSignal, _unsorted: Sequence[Harmonic] = ()) -> APSignal:
    """Sum of signals; harmonics at (relatively) equal frequencies are added."""
    pool = [h for s in signals for h in s.harmonics] + list(_unsorted)
    pool.sort(key=lambda h: h.omega)
    out: list[Harmonic] = []
    for h in pool:
        if out and _same_freq(out[-1].omega, h.omega):
            last = out[-1]
            out[-1] = Harmonic(last.omega, last.a + h.a, last.b + h.b)
        else:
            out.append(h)
    return APSignal(tuple(out), sum(s.offset for s in signals))


def evaluate(signal: APSignal, t):
    """Value of the signal at time(s) ``t``; scalar in, float out."""
    t_arr = np.asarray(t, dtype=float)
    val = np.full(t_arr.shape, float(signal.offset))
    for h in signal.harmonics:
        wt = h.omega * t_arr
        val = val + (h.a * np.cos(wt) + h.b * np.sin(wt))
    if val.ndim == 0:
        return float(val)
    return val


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled record; sample ``i`` is taken at ``t = i*dt``."""

    dt: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be finite and > 0, got {self.dt}")
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("a time series needs at least two samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.samples.size)

    @property
    def duration(self) -> float:
        return self.dt * self.samples.size

    def scaled(self, alpha: float) -> "TimeSeries":
        return TimeSeries(self.dt, alpha * self.samples)


def synthesize(signal: APSignal, dt: float, n: int) -> TimeSeries:
    if n < 2:
        raise ValueError("n must be >= 2")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    t = dt * np.arange(n)
    return TimeSeries(dt, evaluate(signal, t))


@dataclass(frozen=True)
class NoiseModel:
    """Measurement distortion of a record.

    The record becomes ``theta_hat * clean + reduced_noise + additive_noise``;
    a time-varying multiplicative factor is represented only through its
    mean ``theta_hat`` and the residual ``reduced_noise`` term it produces.
    """

    theta_hat: float = 1.0
    reduced_noise: APSignal = APSignal()
    additive_noise: APSignal = APSignal()

    def __post_init__(self):
        if not np.isfinite(self.theta_hat):
            raise ValueError("theta_hat must be finite")


def apply_noise(clean: TimeSeries, model: NoiseModel) -> TimeSeries:
    t = clean.times
    out = model.theta_hat * clean.samples
    if len(model.reduced_noise) or model.reduced_noise.offset:
        out = out + evaluate(model.reduced_noise, t)
    if len(model.additive_noise) or model.additive_noise.offset:
        out = out + evaluate(model.additive_noise, t)
    return TimeSeries(clean.dt, out)


@dataclass(frozen=True)
class CouplingSpec:
    """Components shared between pairs of inputs, as ``(i, l, signal)`` triples."""

    pairs: tuple[tuple[int, int, APSignal], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        for i, l, _ in self.pairs:
            if i == l:
                raise ValueError(f"a coupling needs two distinct inputs, got ({i}, {l})")

    @property
    def frequencies(self) -> np.ndarray:
        ws = sorted({h.omega for _, _, s in self.pairs for h in s.harmonics})
        return np.array(ws, dtype=float)


def make_coupled_inputs(
    privates: Sequence[APSignal], coupling: CouplingSpec, delta: float
) -> list[APSignal]:
    """Add every coupling signal to both inputs it connects.

    Raises :class:`CouplingCollision` when a coupling frequency lies within
    ``delta`` of any private frequency, since the shared component could not
    then be told apart from the private one on a record of that resolution.
    """
    private_ws = np.concatenate([p.frequencies for p in privates]) if privates else np.array([])
    for i, l, sig in coupling.pairs:
        for idx in (i, l):
            if not 0 <= idx < len(privates):
                raise IndexError(f"coupling refers to input {idx}, only {len(privates)} given")
        for h in sig.harmonics:
            if private_ws.size and np.min(np.abs(private_ws - h.omega)) <= delta:
                raise CouplingCollision(
                    f"coupling frequency {h.omega:g} between inputs {i} and {l} "
                    f"is within {delta:g} of a private frequency"
                )
    out = []
    for k, p in enumerate(privates):
        shared = [sig for i, l, sig in coupling.pairs if k in (i, l)]
        out.append(merge(p, *shared) if shared else p)
    return out
