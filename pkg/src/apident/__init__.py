"""Identification of linear ODE channel models from single noisy records.

Signals are treated as almost-periodic functions. Noise and components
shared between inputs are separated from the useful part of a channel by
comparing the sets of harmonic frequencies present in the records; the ODE
coefficients then follow from Fourier exponents at the matched
frequencies.
"""
from .apsignal import (
    APSignal,
    CouplingSpec,
    Harmonic,
    NoiseModel,
    TimeSeries,
    apply_noise,
    evaluate,
    make_coupled_inputs,
    merge,
    synthesize,
)
from .errors import *  # noqa: F401,F403
from .freqalg import FrequencySet, discard_shared, intersect, merge_close, resolution
from .identify import (
    ChannelModel,
    IdentifyConfig,
    build_system,
    detect_astatism,
    frequency_response_point,
    identify_channel,
    simulate_channel,
    simulate_mimo,
    solve_order,
)
from .pipeline import (
    Dataset,
    GridConfig,
    Report,
    estimate_frequencies,
    load_csv,
    report_json,
    run_identification,
    synth_command,
    synthesize_dataset,
    write_csv,
    write_report,
)
from .spectral import (
    FourierExponentPair,
    Spectrum,
    amplitude_spectrum,
    find_peaks,
    fit_harmonics,
    fourier_exponent,
    fourier_exponents,
    mean_power,
    refine_frequencies,
)

__version__ = "0.1.0"
