"""Frequency sets compared up to a resolution.

Two frequencies read off a record of duration ``T`` are indistinguishable
when they differ by less than ``delta = 2*pi/T``. The operations here
treat sorted frequency arrays as sets under that tolerance: channel
matching between an input and an output (:func:`intersect`) and removal
of components that an input shares with other inputs
(:func:`discard_shared`).

Boundary convention: a distance of exactly ``delta`` *is* a match in
:func:`intersect` but is *not* shared in :func:`discard_shared`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = ["FrequencySet", "resolution", "merge_close", "intersect", "discard_shared"]


def resolution(record_duration: float) -> float:
    """``2*pi/T``."""
    if not record_duration > 0:
        raise ValueError(f"record duration must be > 0, got {record_duration}")
    return 2 * np.pi / record_duration


@dataclass(frozen=True)
class FrequencySet:
    """Sorted angular frequencies, pairwise at least ``delta`` apart."""

    freqs: np.ndarray = field(default_factory=lambda: np.empty(0))
    delta: float = 1.0

    def __post_init__(self):
        f = np.array(self.freqs, dtype=float).reshape(-1)
        f.setflags(write=False)
        object.__setattr__(self, "freqs", f)
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")

    def __len__(self):
        return self.freqs.size

    def __iter__(self):
        return iter(self.freqs.tolist())

    def __contains__(self, omega) -> bool:
        return bool(self.freqs.size) and bool(np.min(np.abs(self.freqs - omega)) <= self.delta)


def merge_close(
    freqs: Sequence[float], delta: float, amplitudes: Optional[Sequence[float]] = None
) -> FrequencySet:
    """Collapse runs of frequencies closer than ``delta``.

    Sweeping upward, a frequency within ``delta`` of the last kept one
    competes with it: the larger amplitude wins, or the lower frequency
    when no amplitudes are given.
    """
    if not delta > 0:
        raise ValueError("delta must be > 0")
    f = np.asarray(freqs, dtype=float).reshape(-1)
    amp = None if amplitudes is None else np.asarray(amplitudes, dtype=float).reshape(-1)
    order = np.argsort(f, kind="stable")
    kept_w: list[float] = []
    kept_a: list[float] = []
    for idx in order:
        w = float(f[idx])
        a = -np.inf if amp is None else float(amp[idx])
        if kept_w and w - kept_w[-1] < delta:
            if a > kept_a[-1]:
                kept_w[-1], kept_a[-1] = w, a
            continue
        kept_w.append(w)
        kept_a.append(a)
    return FrequencySet(np.array(kept_w), delta)


def _check_same_delta(sets):
    d0 = sets[0].delta
    for s in sets[1:]:
        if abs(s.delta - d0) > 1e-12 * d0:
            raise ValueError(f"frequency sets have different resolutions: {d0} vs {s.delta}")


def _nearest_distance(values: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Distance from each of ``values`` to the nearest element of sorted ``ref``."""
    if ref.size == 0:
        return np.full(values.shape, np.inf)
    pos = np.searchsorted(ref, values)
    left = ref[np.clip(pos - 1, 0, ref.size - 1)]
    right = ref[np.clip(pos, 0, ref.size - 1)]
    return np.minimum(np.abs(values - left), np.abs(values - right))


def intersect(a: FrequencySet, b: FrequencySet, delta_mult: float = 1.0) -> FrequencySet:
    """Elements of ``a`` with a partner in ``b`` no farther than ``delta``.

    Returned values come from ``a``.
    """
    _check_same_delta([a, b])
    tol = delta_mult * a.delta
    keep = _nearest_distance(a.freqs, b.freqs) <= tol
    return FrequencySet(a.freqs[keep], a.delta)


def discard_shared(sets: Sequence[FrequencySet], i: int, delta_mult: float = 1.0) -> FrequencySet:
    """Set ``i`` without the frequencies strictly closer than ``delta`` to any other set."""
    _check_same_delta(list(sets))
    own = sets[i]
    others = [s.freqs for m, s in enumerate(sets) if m != i]
    foreign = np.sort(np.concatenate(others)) if others else np.empty(0)
    keep = _nearest_distance(own.freqs, foreign) >= delta_mult * own.delta
    return FrequencySet(own.freqs[keep], own.delta)
