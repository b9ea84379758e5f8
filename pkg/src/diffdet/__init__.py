"""Simulation and noise analysis of differential AC-coupled
charge-integrating photodetectors.

The package models a pulsed (or continuous) coherent source split onto
a balanced photodiode pair, the analog front end that integrates and
shapes the differential photocurrent, and the gated digital analysis
that turns sampled traces into per-pulse charge observables.  Its
central question: above which photon number does optical shot noise
beat the electronic noise floor of the chain?
"""

from .chain import (
    ChainResponse,
    DetectorChainConfig,
    Trace,
    chain_transfer_power,
    impulse_response,
    matched_window_offset,
    quantize_trace,
    synthesize_cw_trace,
    synthesize_trace,
    version_i,
    version_ii,
)
from .errors import (
    AnalysisError,
    ConfigurationError,
    DiffdetError,
    IngestError,
)
from .photons import (
    CoherentPulseTrainSpec,
    PulseChargeSample,
    expected_differential_mean,
    expected_shot_variance,
    sample_pulse_train,
)
from .pipeline import RunConfig, load_run_config, run_pipeline
from .pulses import (
    ClassicalNoiseReport,
    NoiseScalingResult,
    PulseAreas,
    ScalingFit,
    WindowOptimization,
    classical_noise_check,
    fit_noise_scaling,
    gate_pulse_areas,
    integrate_boxcar,
    integrate_dcs,
    noise_scaling,
    optimize_window,
    pulse_variance,
    resolve_window,
)
from .spectra import (
    SpectrumEstimate,
    band_edge_frequency,
    estimate_psd,
    extract_transimpedance,
    predict_pulsed_noise,
    signal_to_electronic_ratio,
)
from .traceio import read_spectrum, read_trace, write_spectrum, write_trace
from .windows import (
    GatingWindow,
    boxcar_power_spectrum,
    dcs_power_spectrum,
    sampled_window,
    window_power_spectrum,
    window_value,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "ChainResponse",
    "ClassicalNoiseReport",
    "CoherentPulseTrainSpec",
    "ConfigurationError",
    "DetectorChainConfig",
    "DiffdetError",
    "GatingWindow",
    "IngestError",
    "NoiseScalingResult",
    "PulseAreas",
    "PulseChargeSample",
    "RunConfig",
    "ScalingFit",
    "SpectrumEstimate",
    "Trace",
    "WindowOptimization",
    "band_edge_frequency",
    "boxcar_power_spectrum",
    "chain_transfer_power",
    "classical_noise_check",
    "dcs_power_spectrum",
    "estimate_psd",
    "expected_differential_mean",
    "expected_shot_variance",
    "extract_transimpedance",
    "fit_noise_scaling",
    "gate_pulse_areas",
    "impulse_response",
    "integrate_boxcar",
    "integrate_dcs",
    "load_run_config",
    "matched_window_offset",
    "noise_scaling",
    "optimize_window",
    "predict_pulsed_noise",
    "pulse_variance",
    "quantize_trace",
    "read_spectrum",
    "read_trace",
    "resolve_window",
    "run_pipeline",
    "sample_pulse_train",
    "sampled_window",
    "signal_to_electronic_ratio",
    "synthesize_cw_trace",
    "synthesize_trace",
    "version_i",
    "version_ii",
    "window_power_spectrum",
    "window_value",
    "write_spectrum",
    "write_trace",
]
