"""End-to-end identification of one control channel from recorded data.

Order of work for a channel ``x -> y``:

1. resolution ``delta = 2*pi/T`` of the record;
2. amplitude spectrum and peak frequencies of every input and the output
   (optionally sharpened by :func:`~apident.spectral.refine_frequencies`);
3. frequencies that input ``x`` shares with any other input are dropped;
4. what remains is matched against the output frequencies;
5. Fourier exponents of ``x`` and ``y`` at the matched frequencies feed
   :func:`~apident.identify.identify_channel`.
"""
from __future__ import annotations

import csv
import json
import math
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .apsignal import (
    APSignal,
    CouplingSpec,
    NoiseModel,
    TimeSeries,
    apply_noise,
    make_coupled_inputs,
    synthesize,
)
from .errors import (
    EmptyMatchedSet,
    MethodError,
    NoConsistentOrder,
    NonNumericCell,
    NonUniformSampling,
    RaggedColumns,
    ReportError,
)
from .freqalg import FrequencySet, discard_shared, intersect, resolution
from .identify import ChannelModel, IdentifyConfig, frequency_response_point, identify_channel, simulate_mimo
from .spectral import (
    FourierExponentPair,
    amplitude_spectrum,
    find_peaks,
    fit_harmonics,
    fourier_exponents,
    refine_frequencies,
)

__all__ = [
    "Dataset",
    "GridConfig",
    "Report",
    "load_csv",
    "write_csv",
    "estimate_frequencies",
    "run_identification",
    "write_report",
    "report_json",
    "synthesize_dataset",
    "synth_command",
]

_SIG_DIGITS = 12


@dataclass(frozen=True)
class Dataset:
    """Synchronised, uniformly sampled records keyed by column name."""

    dt: float
    channels: dict
    input_names: tuple = ()
    output_names: tuple = ()
    t0: float = 0.0

    def __post_init__(self):
        chans = {}
        lengths = set()
        for name, values in self.channels.items():
            arr = np.array(values, dtype=float)
            arr.setflags(write=False)
            chans[str(name)] = arr
            lengths.add(arr.size)
        if len(lengths) > 1:
            raise ValueError("all channels must have the same length")
        if lengths and lengths.pop() < 2:
            raise ValueError("channels need at least two samples")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        object.__setattr__(self, "channels", chans)
        object.__setattr__(self, "input_names", tuple(self.input_names))
        object.__setattr__(self, "output_names", tuple(self.output_names))
        for name in self.input_names + self.output_names:
            if name not in chans:
                raise KeyError(f"no channel named {name!r}")

    @property
    def n(self) -> int:
        return next(iter(self.channels.values())).size

    @property
    def duration(self) -> float:
        return self.dt * self.n

    def series(self, name: str) -> TimeSeries:
        try:
            return TimeSeries(self.dt, self.channels[name])
        except KeyError:
            raise KeyError(f"no channel named {name!r}") from None

    def equals(self, other: "Dataset") -> bool:
        return (
            self.dt == other.dt
            and list(self.channels) == list(other.channels)
            and all(np.array_equal(self.channels[k], other.channels[k]) for k in self.channels)
        )


def _fmt(x: float) -> str:
    return f"{x:.{_SIG_DIGITS}g}"


def _round_sig(x: float) -> float:
    return float(_fmt(x))


def load_csv(path) -> Dataset:
    """Read a ``t,<name>,...`` table with uniform time stamps."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise RaggedColumns(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "t":
        raise RaggedColumns(f"{path}: first column must be named 't', got {header[:1]}")
    if len(set(header)) != len(header):
        raise RaggedColumns(f"{path}: duplicate column names in header")
    data = []
    for r, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise RaggedColumns(f"{path}: row {r} has {len(row)} cells, header has {len(header)}")
        vals = []
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise NonNumericCell(f"{path}: row {r}, column {header[c]!r}: {cell!r}") from None
            if not math.isfinite(v):
                raise NonNumericCell(f"{path}: row {r}, column {header[c]!r}: {cell!r}")
            vals.append(v)
        data.append(vals)
    if len(data) < 2:
        raise RaggedColumns(f"{path}: need at least two data rows")
    arr = np.array(data)
    t = arr[:, 0]
    dt = t[1] - t[0]
    if not dt > 0:
        raise NonUniformSampling(f"{path}: row 2: time must increase")
    for r in range(2, t.size):
        if abs((t[r] - t[r - 1]) - dt) > 1e-6 * dt:
            raise NonUniformSampling(
                f"{path}: row {r + 1}: step {t[r] - t[r - 1]:g} differs from dt={dt:g}"
            )
    channels = {name: arr[:, j] for j, name in enumerate(header[1:], start=1)}
    return Dataset(float(dt), channels, t0=float(t[0]))


def write_csv(dataset: Dataset, path) -> None:
    names = list(dataset.channels)
    cols = [dataset.channels[n] for n in names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(["t"] + names) + "\n")
        for i in range(dataset.n):
            t = dataset.t0 + i * dataset.dt
            fh.write(",".join([_fmt(t)] + [_fmt(c[i]) for c in cols]) + "\n")


@dataclass(frozen=True)
class GridConfig:
    """Spectrum grid and peak settings; ``None`` grid fields pick defaults.

    Defaults: from ``2*delta`` to the Nyquist frequency ``pi/dt`` in steps
    of ``delta/8``.

    ``projection`` selects how Fourier exponents at the matched frequencies
    are computed: ``"mean"`` is the finite-record mean, exact when the
    record holds whole periods of every component; ``"fit"`` reads them off
    a joint least-squares fit at all frequencies found in the record, which
    removes leakage between neighbouring components of any frequency.
    """

    omega_min: Optional[float] = None
    omega_max: Optional[float] = None
    step: Optional[float] = None
    peak_rel_threshold: float = 0.05
    delta_mult: float = 1.0
    refine: bool = True
    projection: str = "mean"

    def __post_init__(self):
        if self.projection not in ("mean", "fit"):
            raise ValueError(f"projection must be 'mean' or 'fit', got {self.projection!r}")

    def resolve(self, dt: float, duration: float) -> tuple[float, float, float]:
        delta = resolution(duration)
        lo = 2 * delta if self.omega_min is None else self.omega_min
        hi = np.pi / dt if self.omega_max is None else self.omega_max
        step = delta / 8 if self.step is None else self.step
        return lo, hi, step


def estimate_frequencies(ts: TimeSeries, grid: GridConfig = GridConfig()) -> FrequencySet:
    """Frequencies of the harmonic components visible in one record."""
    lo, hi, step = grid.resolve(ts.dt, ts.duration)
    peaks = find_peaks(amplitude_spectrum(ts, lo, hi, step), grid.peak_rel_threshold)
    if grid.refine and len(peaks):
        peaks = refine_frequencies(ts, peaks, grid.peak_rel_threshold)
    return peaks


@dataclass
class Report:
    channel: str
    delta: float
    matched_frequencies: list
    exponents: list
    W_lowest: Optional[complex]
    p_a: Optional[int]
    order: Optional[int]
    coefficients: Optional[list]
    residuals: list
    conditions: list
    warnings: list
    trial_orders: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    # analysis by-products, not serialised
    input_sets: dict = field(default_factory=dict, repr=False)
    independent_set: Optional[FrequencySet] = field(default=None, repr=False)
    output_set: Optional[FrequencySet] = field(default=None, repr=False)
    model: Optional[ChannelModel] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        def cx(z):
            return None if z is None else [z.real, z.imag]

        return {
            "channel": self.channel,
            "delta": self.delta,
            "matched_frequencies": list(self.matched_frequencies),
            "exponents": [
                {"omega": p.omega, "s_in": cx(p.s_in), "s_out": cx(p.s_out)} for p in self.exponents
            ],
            "W_lowest": cx(self.W_lowest),
            "p_a": self.p_a,
            "order": self.order,
            "coefficients": None if self.coefficients is None else list(self.coefficients),
            "residuals": list(self.residuals),
            "conditions": list(self.conditions),
            "warnings": list(self.warnings),
            "trial_orders": list(self.trial_orders),
            "config": self.config,
        }


@contextmanager
def _stage(name: str):
    try:
        yield
    except MethodError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
            exc.args = (f"[{name}] {exc.args[0] if exc.args else ''}",) + exc.args[1:]
        raise


def run_identification(
    dataset: Dataset,
    inputs: Sequence[str],
    output: str,
    channel: Optional[str] = None,
    grid: GridConfig = GridConfig(),
    config: IdentifyConfig = IdentifyConfig(),
) -> Report:
    """Identify the channel ``channel -> output`` (``channel`` defaults to ``inputs[0]``).

    ``inputs`` lists every input acting on the output; frequencies shared
    among them are excluded before matching. Raises
    :class:`EmptyMatchedSet` when the chosen input and the output have no
    frequency in common, and :class:`NoConsistentOrder` (with the partial
    report on ``exc.report``) when no trial order is consistent.
    """
    inputs = list(inputs)
    channel = inputs[0] if channel is None else channel
    if channel not in inputs:
        raise KeyError(f"channel input {channel!r} is not among the inputs {inputs}")
    idx = inputs.index(channel)
    delta = resolution(dataset.duration)
    x_ts = dataset.series(channel)
    y_ts = dataset.series(output)
    warnings = []

    with _stage("spectra"):
        input_sets = {name: estimate_frequencies(dataset.series(name), grid) for name in inputs}
        y_set = estimate_frequencies(y_ts, grid)
    with _stage("separation"):
        independent = discard_shared([input_sets[n] for n in inputs], idx, grid.delta_mult)
        dropped = len(input_sets[channel]) - len(independent)
        if dropped:
            warnings.append(f"{dropped} of {len(input_sets[channel])} frequencies of {channel} "
                            f"are shared with other inputs and were discarded")
        matched = intersect(independent, y_set, grid.delta_mult)
        if not len(matched):
            raise EmptyMatchedSet(f"no frequency of {channel} (after separation) appears in {output}")
    omegas = matched.freqs
    if grid.projection == "fit":
        s_in = _fitted_exponents(x_ts, input_sets[channel], omegas)
        s_out = _fitted_exponents(y_ts, y_set, omegas)
    else:
        s_in = fourier_exponents(x_ts, omegas)
        s_out = fourier_exponents(y_ts, omegas)
    pairs = [FourierExponentPair(float(w), complex(a), complex(b)) for w, a, b in zip(omegas, s_in, s_out)]

    q = len(pairs)
    cap = 2 * q - 1
    eff = config
    if config.max_order > cap:
        warnings.append(f"only {q} matched frequencies: order cap lowered from {config.max_order} to {cap}")
        eff = _replace_orders(config, min(config.min_order, cap), cap)

    with _stage("astatism"):
        w_low = frequency_response_point(pairs[0])

    report = Report(
        channel=f"{channel}:{output}",
        delta=delta,
        matched_frequencies=omegas.tolist(),
        exponents=pairs,
        W_lowest=w_low,
        p_a=None,
        order=None,
        coefficients=None,
        residuals=[],
        conditions=[],
        warnings=warnings,
        config={"inputs": inputs, "grid": asdict(grid), "identify": asdict(config)},
        input_sets=input_sets,
        independent_set=independent,
        output_set=y_set,
    )
    try:
        with _stage("identification"):
            model = identify_channel(pairs, eff)
    except NoConsistentOrder as exc:
        if exc.model is not None:
            report.p_a = exc.model.p_a
            report.trial_orders = list(exc.model.trial_orders)
            report.residuals = list(exc.model.residuals)
            report.conditions = list(exc.model.conditions)
        report.warnings.append("no consistent order: coefficients omitted")
        exc.report = report
        raise
    report.p_a = model.p_a
    report.order = model.order
    report.coefficients = list(model.coefficients)
    report.trial_orders = list(model.trial_orders)
    report.residuals = list(model.residuals)
    report.conditions = list(model.conditions)
    report.model = model
    return report


def _fitted_exponents(ts: TimeSeries, found: FrequencySet, omegas: np.ndarray) -> np.ndarray:
    """Exponents at ``omegas`` from a fit that also carries the record's other components."""
    others = found.freqs[[np.min(np.abs(omegas - w)) > found.delta for w in found.freqs]]
    _, a, b = fit_harmonics(ts, np.concatenate([omegas, others]))
    k = omegas.size
    return (a[:k] - 1j * b[:k]) / 2


def _replace_orders(config: IdentifyConfig, lo: int, hi: int) -> IdentifyConfig:
    return replace(config, min_order=max(1, lo), max_order=max(1, hi))


def _sanitize(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ReportError(f"non-finite number {obj!r} in report")
        return _round_sig(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return _sanitize(obj.item())
    if isinstance(obj, complex):
        return [_sanitize(obj.real), _sanitize(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def report_json(report) -> str:
    """JSON text for one report or a list of reports."""
    body = [r.to_dict() for r in report] if isinstance(report, (list, tuple)) else report.to_dict()
    return json.dumps(_sanitize(body), indent=2, allow_nan=False) + "\n"


def write_report(report, path) -> None:
    text = report_json(report)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# --- synthetic data -------------------------------------------------------


def _terms(spec) -> list:
    return [tuple(map(float, h)) for h in spec]


class _FrequencyDraw:
    """Random frequencies keeping a minimum gap to everything drawn so far."""

    def __init__(self, rng, delta, gap):
        self.rng = rng
        self.delta = delta
        self.gap = gap
        self.taken: list[float] = []

    def reserve(self, freqs):
        self.taken.extend(float(w) for w in freqs)

    def draw(self, count, omega_min, omega_max, commensurate=False, max_tries=100_000):
        out = []
        for _ in range(max_tries):
            if len(out) == count:
                break
            if commensurate:
                k = self.rng.integers(math.ceil(omega_min / self.delta), math.floor(omega_max / self.delta) + 1)
                w = float(k * self.delta)
            else:
                w = float(self.rng.uniform(omega_min, omega_max))
            if all(abs(w - v) >= self.gap * (1 - 1e-9) for v in self.taken):
                self.taken.append(w)
                out.append(w)
        if len(out) < count:
            raise ValueError(f"could not place {count} frequencies in [{omega_min}, {omega_max}] "
                             f"with gap {self.gap:g}")
        return sorted(out)


def _signal_from_spec(spec: dict, draw: _FrequencyDraw, rng) -> APSignal:
    terms = _terms(spec.get("harmonics", []))
    rnd = spec.get("random")
    if rnd:
        ws = draw.draw(int(rnd["count"]), float(rnd["omega_min"]), float(rnd["omega_max"]),
                       bool(rnd.get("commensurate", False)))
        lo, hi = rnd.get("amp_range", [0.5, 1.5])
        for w in ws:
            amp = rng.uniform(lo, hi)
            phase = rng.uniform(0, 2 * np.pi)
            terms.append((w, amp * np.cos(phase), amp * np.sin(phase)))
    return APSignal.from_terms(terms, float(spec.get("offset", 0.0)))


def _noise_from_spec(spec: Optional[dict], draw, rng) -> NoiseModel:
    if not spec:
        return NoiseModel()
    return NoiseModel(
        float(spec.get("theta_hat", 1.0)),
        _signal_from_spec(spec.get("reduced", {}), draw, rng),
        _signal_from_spec(spec.get("additive", {}), draw, rng),
    )


def _signal_json(sig: APSignal) -> dict:
    return {"offset": sig.offset, "harmonics": [[h.omega, h.a, h.b] for h in sig.harmonics]}


def synthesize_dataset(config: dict, seed: int = 0) -> tuple[Dataset, dict]:
    """Build a dataset and its ground-truth manifest from a synth configuration.

    The configuration is a dict with keys ``dt``, ``n``, ``inputs``,
    ``couplings`` (optional), ``outputs``; see the README for the layout.
    Explicitly listed harmonic frequencies are reserved before any random
    draw so random components keep at least ``gap_deltas`` (default 3)
    resolutions away from them and from each other. Samples are rounded to
    the precision used by :func:`write_csv`, so writing and reloading the
    dataset reproduces it exactly.
    """
    dt = float(config["dt"])
    n = int(config["n"])
    delta = resolution(dt * n)
    rng = np.random.default_rng(seed)
    draw = _FrequencyDraw(rng, delta, float(config.get("gap_deltas", 3.0)) * delta)

    in_specs = config["inputs"]
    names = [s["name"] for s in in_specs]
    cp_specs = config.get("couplings", [])
    out_specs = config.get("outputs", [])
    for spec in in_specs + cp_specs:
        draw.reserve(h[0] for h in spec.get("harmonics", []))
    for spec in in_specs + out_specs:
        for part in ("reduced", "additive"):
            draw.reserve(h[0] for h in (spec.get("noise") or {}).get(part, {}).get("harmonics", []))

    privates = [_signal_from_spec(s, draw, rng) for s in in_specs]
    pairs = []
    for s in cp_specs:
        i, l = (names.index(v) for v in s["inputs"])
        pairs.append((i, l, _signal_from_spec(s, draw, rng)))
    coupling = CouplingSpec(tuple(pairs))
    true_inputs = make_coupled_inputs(privates, coupling, delta)

    in_noise = [_noise_from_spec(s.get("noise"), draw, rng) for s in in_specs]
    out_noise = [_noise_from_spec(s.get("noise"), draw, rng) for s in out_specs]

    channels = {}
    for name, sig, nm in zip(names, true_inputs, in_noise):
        channels[name] = apply_noise(synthesize(sig, dt, n), nm).samples
    models = []
    for spec, nm in zip(out_specs, out_noise):
        row = []
        for name in names:
            ch = spec.get("channels", {}).get(name)
            row.append(None if ch is None else ChannelModel(int(ch.get("p_a", 0)), tuple(ch["coefficients"])))
        models.append(row)
        y = simulate_mimo(true_inputs, models, len(models) - 1)
        channels[spec["name"]] = apply_noise(synthesize(y, dt, n), nm).samples
    channels = {k: np.array([_round_sig(v) for v in arr]) for k, arr in channels.items()}
    dataset = Dataset(_round_sig(dt), channels, tuple(names), tuple(s["name"] for s in out_specs))

    manifest = {
        "seed": int(seed),
        "dt": dt,
        "n": n,
        "delta": delta,
        "inputs": {
            name: {"private": _signal_json(p), "private_frequencies": p.frequencies.tolist(),
                   "noise": _noise_json(nm)}
            for name, p, nm in zip(names, privates, in_noise)
        },
        "couplings": [
            {"inputs": [names[i], names[l]], **_signal_json(sig), "frequencies": sig.frequencies.tolist()}
            for i, l, sig in coupling.pairs
        ],
        "coupling_frequencies": coupling.frequencies.tolist(),
        "outputs": {
            spec["name"]: {
                "channels": {
                    name: {"p_a": m.p_a, "order": m.order, "coefficients": list(m.coefficients)}
                    for name, m in zip(names, row) if m is not None
                },
                "noise": _noise_json(nm),
            }
            for spec, row, nm in zip(out_specs, models, out_noise)
        },
    }
    return dataset, manifest


def _noise_json(nm: NoiseModel) -> dict:
    return {"theta_hat": nm.theta_hat, "reduced": _signal_json(nm.reduced_noise),
            "additive": _signal_json(nm.additive_noise)}


def synth_command(config: dict, seed: int, out_csv, manifest_path) -> tuple[Dataset, dict]:
    """Write the synthetic dataset as CSV and its manifest as JSON."""
    dataset, manifest = synthesize_dataset(config, seed)
    write_csv(dataset, out_csv)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(_sanitize(manifest), indent=2, allow_nan=False) + "\n")
    return dataset, manifest
