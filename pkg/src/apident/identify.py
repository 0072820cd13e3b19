"""Channel identification from Fourier exponents.

A channel is modelled by the ODE whose frequency-domain form is

    sum_{k=0}^{g} T_{k+p_a} (j w)^{k+p_a} S_y(jw) = S_x(jw),

i.e. ``D(jw) S_y = S_x`` with characteristic polynomial
``D(s) = sum T_k s^k`` whose first ``p_a`` coefficients vanish (astatism
order). Each matched frequency contributes one complex equation, split into
a real and an imaginary row; trial orders ``g`` are solved in increasing
order and the largest consistent one is kept.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .apsignal import APSignal, Harmonic
from .errors import (
    AmbiguousQuadrant,
    InsufficientFrequencies,
    NoConsistentOrder,
    PoleOnFrequency,
    RankDeficient,
    ZeroInputExponent,
)
from .spectral import FourierExponentPair

__all__ = [
    "ChannelModel",
    "IdentifyConfig",
    "frequency_response_point",
    "detect_astatism",
    "build_system",
    "solve_order",
    "identify_channel",
    "simulate_channel",
    "simulate_mimo",
]


@dataclass(frozen=True)
class ChannelModel:
    """Coefficients ``T_{p_a} .. T_{p_a+order}`` of ``D(s) = sum_k T_k s^k``.

    ``trial_orders``, ``residuals`` and ``conditions`` are filled in by
    :func:`identify_channel`; a residual or condition of ``None`` marks a
    rank-deficient trial.
    """

    p_a: int
    coefficients: tuple[float, ...]
    trial_orders: tuple[int, ...] = ()
    residuals: tuple[Optional[float], ...] = ()
    conditions: tuple[Optional[float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.p_a not in (0, 1, 2):
            raise ValueError(f"astatism order must be 0, 1 or 2, got {self.p_a}")
        if not self.coefficients:
            raise ValueError("a channel model needs at least one coefficient")
        if not all(np.isfinite(self.coefficients)):
            raise ValueError("coefficients must be finite")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def full_coefficients(self) -> np.ndarray:
        """``T_0 .. T_{p_a+order}`` including the leading zeros."""
        return np.concatenate([np.zeros(self.p_a), self.coefficients])

    def characteristic(self, omega) -> np.ndarray:
        """``D(j*omega)``."""
        s = 1j * np.asarray(omega, dtype=float)
        return sum(c * s**k for k, c in enumerate(self.coefficients, start=self.p_a))

    def response(self, omega) -> np.ndarray:
        """``W(j*omega) = 1/D(j*omega)``."""
        return 1.0 / self.characteristic(omega)


@dataclass(frozen=True)
class IdentifyConfig:
    """Order search settings.

    A trial order is consistent when the relative least-squares residual is
    at most ``consistency_tol``, the condition estimate at most
    ``condition_cap``, the system has more equations than unknowns, and the
    highest-order term contributes at least ``term_tol`` (default:
    ``consistency_tol``) of ``|D|`` at some matched frequency. The last
    condition rejects orders that only add a vanishing coefficient.
    """

    min_order: int = 1
    max_order: int = 10
    consistency_tol: float = 1e-3
    condition_cap: float = 1e10
    term_tol: Optional[float] = None
    p_a: Optional[int] = None
    astatism_vote: bool = False
    axis_tol: float = 1e-6

    def __post_init__(self):
        if not 1 <= self.min_order <= self.max_order:
            raise ValueError("need 1 <= min_order <= max_order")
        if not self.consistency_tol > 0:
            raise ValueError("consistency_tol must be > 0")
        if self.p_a is not None and self.p_a not in (0, 1, 2):
            raise ValueError("p_a override must be 0, 1 or 2")


def frequency_response_point(pair: FourierExponentPair) -> complex:
    if abs(pair.s_in) == 0 or abs(pair.s_in) < 1e-12 * abs(pair.s_out):
        raise ZeroInputExponent(f"input exponent vanishes at omega={pair.omega:g}")
    return complex(pair.s_out / pair.s_in)


def detect_astatism(w: complex, axis_tol: float = 1e-6) -> int:
    """Astatism order from the quadrant of ``W`` at the lowest frequency.

    Quadrants I, II, III map to 0, 1, 2. Quadrant IV and points within
    ``axis_tol`` radians of an axis raise :class:`AmbiguousQuadrant`.
    """
    w = complex(w)
    if not np.isfinite(w) or w == 0:
        raise AmbiguousQuadrant(f"frequency response point {w} is zero or not finite", w)
    angle = np.angle(w)
    to_axis = np.min(np.abs(angle - np.array([-np.pi, -np.pi / 2, 0.0, np.pi / 2, np.pi])))
    if to_axis < axis_tol:
        raise AmbiguousQuadrant(f"W = {w} lies on a coordinate axis", w)
    if w.real > 0 and w.imag > 0:
        return 0
    if w.real < 0 and w.imag > 0:
        return 1
    if w.real < 0 and w.imag < 0:
        return 2
    raise AmbiguousQuadrant(f"W = {w} lies in the fourth quadrant", w)


def build_system(pairs: Sequence[FourierExponentPair], p_a: int, g: int,
                 omega_scale: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Real least-squares system for ``T_{p_a} .. T_{p_a+g}``.

    Rows come in pairs (real part, imaginary part) per frequency. With
    ``omega_scale`` = c the columns use ``j*omega/c`` and the unknowns are
    ``T_k * c**k``.
    """
    q = len(pairs)
    if 2 * q < g + 1:
        raise InsufficientFrequencies(f"{q} frequencies give {2 * q} equations for {g + 1} unknowns")
    omega = np.array([p.omega for p in pairs], dtype=float) / omega_scale
    s_in = np.array([p.s_in for p in pairs], dtype=complex)
    s_out = np.array([p.s_out for p in pairs], dtype=complex)
    powers = np.arange(p_a, p_a + g + 1)
    cols = (1j * omega[:, None]) ** powers[None, :] * s_out[:, None]
    a = np.empty((2 * q, g + 1))
    a[0::2] = cols.real
    a[1::2] = cols.imag
    rhs = np.empty(2 * q)
    rhs[0::2] = s_in.real
    rhs[1::2] = s_in.imag
    return a, rhs


def solve_order(a: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Least-squares solve via pivoted QR.

    Returns ``(solution, relative residual, condition estimate)`` where the
    condition estimate is ``|R[0,0]| / |R[-1,-1]|``.
    """
    m, n = a.shape
    q, r, piv = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size < n or diag[0] == 0 or diag[-1] <= max(m, n) * np.finfo(float).eps * diag[0]:
        raise RankDeficient(f"numerical rank below {n}")
    y = scipy.linalg.solve_triangular(r, q.T @ rhs)
    x = np.empty(n)
    x[piv] = y
    norm_rhs = np.linalg.norm(rhs)
    res = np.linalg.norm(a @ x - rhs)
    rel = res / norm_rhs if norm_rhs > 0 else res
    return x, float(rel), float(diag[0] / diag[-1])


def _lowest_responses(pairs, count):
    return [frequency_response_point(p) for p in pairs[:count]]


def _astatism(pairs, config: IdentifyConfig) -> int:
    if config.p_a is not None:
        return config.p_a
    if not config.astatism_vote:
        return detect_astatism(frequency_response_point(pairs[0]), config.axis_tol)
    votes = []
    for w in _lowest_responses(pairs, 3):
        try:
            votes.append(detect_astatism(w, config.axis_tol))
        except AmbiguousQuadrant:
            continue
    if not votes:
        w0 = frequency_response_point(pairs[0])
        raise AmbiguousQuadrant(f"no usable quadrant among the lowest frequencies (W = {w0})", w0)
    counts = np.bincount(votes, minlength=3)
    if np.sum(counts == counts.max()) > 1:
        # tie: fall back to the lowest usable frequency
        return votes[0]
    return int(np.argmax(counts))


def identify_channel(pairs: Sequence[FourierExponentPair],
                     config: IdentifyConfig = IdentifyConfig()) -> ChannelModel:
    """Astatism order, ODE order and coefficients from matched exponents."""
    if not pairs:
        raise InsufficientFrequencies("no frequency pairs given")
    pairs = sorted(pairs, key=lambda p: p.omega)
    omegas = np.array([p.omega for p in pairs])
    if np.any(np.diff(omegas) <= 0):
        raise ValueError("pair frequencies must be distinct")
    p_a = _astatism(pairs, config)
    q = len(pairs)
    scale = float(np.median(omegas))
    term_tol = config.consistency_tol if config.term_tol is None else config.term_tol
    s = 1j * omegas / scale

    orders, residuals, conditions = [], [], []
    best = None
    for g in range(config.min_order, min(config.max_order, 2 * q - 1) + 1):
        orders.append(g)
        a, rhs = build_system(pairs, p_a, g, scale)
        try:
            x, rel, cond = solve_order(a, rhs)
        except RankDeficient:
            residuals.append(None)
            conditions.append(None)
            continue
        residuals.append(rel)
        conditions.append(cond)
        terms = s[:, None] ** np.arange(p_a, p_a + g + 1)[None, :] * x[None, :]
        d = np.abs(terms.sum(axis=1))
        lead_share = np.max(np.abs(terms[:, -1]) / np.where(d > 0, d, np.inf))
        consistent = (
            a.shape[0] > a.shape[1]
            and rel <= config.consistency_tol
            and cond <= config.condition_cap
            and lead_share >= term_tol
        )
        if consistent:
            best = (g, x)

    diagnostics = dict(trial_orders=tuple(orders), residuals=tuple(residuals),
                       conditions=tuple(conditions))
    if best is None:
        stub = ChannelModel(p_a, (0.0,), **diagnostics)
        raise NoConsistentOrder(
            f"no order in {config.min_order}..{min(config.max_order, 2 * q - 1)} "
            f"is consistent at tolerance {config.consistency_tol:g}", stub)
    g, x = best
    coeffs = x / scale ** np.arange(p_a, p_a + g + 1)
    return ChannelModel(p_a, tuple(coeffs), **diagnostics)


def simulate_channel(signal: APSignal, model: ChannelModel) -> APSignal:
    """Steady-state (forced) response: each harmonic's exponent divided by ``D(jw)``."""
    out = []
    powers = np.arange(model.p_a, model.p_a + len(model.coefficients))
    lead = model.coefficients[-1]
    for h in signal.harmonics:
        d = complex(model.characteristic(h.omega))
        lead_mag = abs(lead) * h.omega ** powers[-1]
        if abs(d) < 1e-12 * lead_mag or d == 0:
            raise PoleOnFrequency(f"D(jw) vanishes at omega={h.omega:g}")
        out.append(Harmonic.from_exponent(h.omega, h.exponent / d))
    offset = 0.0
    if signal.offset:
        t0 = model.full_coefficients[0]
        if t0 == 0:
            raise PoleOnFrequency("constant input component meets an integrating channel")
        offset = signal.offset / t0
    return APSignal(tuple(out), offset)


def simulate_mimo(inputs: Sequence[APSignal],
                  channels: Sequence[Sequence[Optional[ChannelModel]]], p: int) -> APSignal:
    """Output ``p`` of a multi-input system: the sum of every channel response.

    ``channels[p][c]`` is the model from input ``c`` to output ``p``, or
    ``None`` when input ``c`` does not reach that output.
    """
    row = channels[p]
    if len(row) != len(inputs):
        raise ValueError(f"output {p} lists {len(row)} channels for {len(inputs)} inputs")
    total = APSignal()
    for x, model in zip(inputs, row):
        if model is not None:
            total = total + simulate_channel(x, model)
    return total
