"""Front-end electronics chain: integration, shaping, noise, calibration.

The differential photocurrent is AC coupled into a charge integrator
with discharge time ``integrator_discharge`` and shaped by a
semi-Gaussian filter made of one differentiation stage and
``shaper_order`` identical integration stages.  The shaper pole is
rescaled internally so the full width at half maximum of the response
to a short charge burst equals 2.4 x ``shaping_time`` for every order,
matching the usual nameplate convention for shaping amplifiers.

Imperfect compensation of the integrator discharge is modelled by
``pole_zero_residual``: a fraction of the slow discharge tail survives
shaping, so closely spaced pulses ride on each other's tails.  With
perfect compensation the only inter-pulse structure is the AC-coupling
baseline shift that keeps the net trace area at zero.

Filtering runs on the bilinear-discretised chain in second-order
sections; ``chain_transfer_power`` reports the squared gain of the same
discrete system so that transform-domain predictions agree with
filtered traces to numerical precision.

Output traces are calibrated in photoelectron-equivalent units: the
windowed mean of an isolated, noiseless pulse over its matched analysis
window equals the injected differential charge in electrons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import optimize, signal

from .errors import ConfigurationError
from .photons import CoherentPulseTrainSpec, PulseChargeSample

__all__ = [
    "DetectorChainConfig",
    "Trace",
    "ChainResponse",
    "version_i",
    "version_ii",
    "shaper_width_coefficient",
    "chain_transfer_power",
    "impulse_response",
    "matched_window_offset",
    "synthesize_trace",
    "synthesize_cw_trace",
    "quantize_trace",
    "DEFAULT_LEAD_IN",
]

# Default quiet time before the first pulse of a synthesized train (s).
DEFAULT_LEAD_IN = 5e-6

# Nameplate width convention: delta-response FWHM = 2.4 x shaping_time.
WIDTH_FACTOR = 2.4


@dataclass(frozen=True)
class DetectorChainConfig:
    """Electronics and acquisition parameters of one detector build.

    Attributes
    ----------
    shaping_time:
        Nameplate shaping time in seconds; the delta response has a full
        width at half maximum of 2.4 x this value.
    shaper_order:
        Number of integration stages after the differentiator (>= 1).
    integrator_discharge:
        Discharge time constant of the charge integrator in seconds.
    pole_zero_residual:
        Fraction of the integrator discharge tail left uncompensated,
        in [0, 1).  Zero means perfect compensation.
    enc_electrons:
        Equivalent noise charge in electrons rms, referred to a boxcar
        average of length ``enc_reference_window``.
    sample_interval:
        Digitiser sampling period in seconds.
    analog_bandwidth:
        Acquisition band edge in hertz; must not exceed Nyquist.
    enc_reference_window:
        Boxcar length the quoted ENC refers to, in seconds.  ``None``
        defers to pulse_duration + 2 x shaping_time at synthesis time.
    """

    shaping_time: float = 330e-9
    shaper_order: int = 3
    integrator_discharge: float = 50e-6
    pole_zero_residual: float = 0.0
    enc_electrons: float = 280.0
    sample_interval: float = 10e-9
    analog_bandwidth: float = 20e6
    enc_reference_window: float | None = None

    def __post_init__(self) -> None:
        for name in ("shaping_time", "integrator_discharge", "sample_interval"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(
                    f"{name} must be > 0, got {getattr(self, name)}"
                )
        if self.shaper_order < 1:
            raise ConfigurationError(
                f"shaper_order must be >= 1, got {self.shaper_order}"
            )
        if not 0.0 <= self.pole_zero_residual < 1.0:
            raise ConfigurationError(
                "pole_zero_residual must lie in [0, 1), got "
                f"{self.pole_zero_residual}"
            )
        if self.enc_electrons < 0:
            raise ConfigurationError(
                f"enc_electrons must be >= 0, got {self.enc_electrons}"
            )
        if self.analog_bandwidth <= 0:
            raise ConfigurationError(
                f"analog_bandwidth must be > 0, got {self.analog_bandwidth}"
            )
        nyquist = 0.5 / self.sample_interval
        if self.analog_bandwidth > nyquist * (1 + 1e-12):
            raise ConfigurationError(
                f"analog_bandwidth {self.analog_bandwidth:g} Hz exceeds the "
                f"Nyquist frequency {nyquist:g} Hz of the sampling"
            )
        if self.enc_reference_window is not None and self.enc_reference_window <= 0:
            raise ConfigurationError(
                "enc_reference_window must be > 0 when given, got "
                f"{self.enc_reference_window}"
            )
        if self.integrator_discharge < 5 * self.shaping_time:
            raise ConfigurationError(
                "integrator_discharge must be slow against the shaping time"
            )

    def reference_window(self, pulse_duration: float) -> float:
        """Boxcar length the ENC refers to, resolving the default rule."""
        if self.enc_reference_window is not None:
            return self.enc_reference_window
        return pulse_duration + 2.0 * self.shaping_time


def version_i(**overrides) -> DetectorChainConfig:
    """Fast build: 330 ns third-order shaper, ENC 280 e in 1.25 us."""
    base = dict(
        shaping_time=330e-9,
        shaper_order=3,
        enc_electrons=280.0,
        enc_reference_window=1.25e-6,
    )
    base.update(overrides)
    return DetectorChainConfig(**base)


def version_ii(**overrides) -> DetectorChainConfig:
    """Alternate build: 250 ns first-order shaper, ENC 340 e in 1.25 us."""
    base = dict(
        shaping_time=250e-9,
        shaper_order=1,
        enc_electrons=340.0,
        enc_reference_window=1.25e-6,
    )
    base.update(overrides)
    return DetectorChainConfig(**base)


@dataclass(frozen=True, eq=False)
class Trace:
    """A uniformly sampled differential output trace.

    ``samples`` are in photoelectron-equivalent units when ``calibrated``
    is true, otherwise in whatever unit the source provided.
    """

    samples: np.ndarray
    sample_interval: float
    origin_time: float = 0.0
    unit: str = "pe"
    calibrated: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=np.float64)
        )
        if self.samples.ndim != 1:
            raise ConfigurationError("trace samples must be one-dimensional")
        if self.sample_interval <= 0:
            raise ConfigurationError(
                f"sample_interval must be > 0, got {self.sample_interval}"
            )

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size * self.sample_interval

    def times(self) -> np.ndarray:
        """Sample times; sample i covers (origin + i*dt, origin + (i+1)*dt]."""
        return self.origin_time + np.arange(self.samples.size) * self.sample_interval


@dataclass(frozen=True, eq=False)
class ChainResponse:
    """Squared transfer gain of a chain on a frequency grid."""

    frequencies: np.ndarray   # Hz
    gain_power: np.ndarray    # (pe per injected electron)^2, dimensionless

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "frequencies", np.asarray(self.frequencies, dtype=np.float64)
        )
        object.__setattr__(
            self, "gain_power", np.asarray(self.gain_power, dtype=np.float64)
        )
        if self.frequencies.shape != self.gain_power.shape:
            raise ConfigurationError("frequency and gain arrays must match")


@lru_cache(maxsize=None)
def shaper_width_coefficient(order: int) -> float:
    """FWHM of x**order * exp(-x) in units of its time constant.

    Found by bracketed root solving on both sides of the mode at
    x = order; used to rescale the shaper pole so the delta-response
    width is order-independent.
    """
    if order < 1:
        raise ConfigurationError(f"order must be >= 1, got {order}")

    def shape(x: float) -> float:
        return x**order * math.exp(-x)

    half = 0.5 * shape(float(order))

    # Left crossing in (0, order); right crossing beyond the mode.
    left = optimize.brentq(lambda x: shape(x) - half, 1e-12, float(order))
    hi = float(order)
    while shape(hi) > half:
        hi += 1.0
    right = optimize.brentq(lambda x: shape(x) - half, float(order), hi)
    return right - left


def _shaper_pole_time(config: DetectorChainConfig) -> float:
    """Per-stage pole time constant realising the nameplate width."""
    return WIDTH_FACTOR / shaper_width_coefficient(config.shaper_order) \
        * config.shaping_time


def _analog_zpk(config: DetectorChainConfig):
    """Continuous-time zeros, poles, gain of the full chain."""
    tau_p = _shaper_pole_time(config)
    a_int = 1.0 / config.integrator_discharge
    a_shp = 1.0 / tau_p
    eps = config.pole_zero_residual

    zeros = [0.0]
    poles = [-a_int] + [-a_shp] * (config.shaper_order + 1)
    gain = a_shp ** (config.shaper_order + 1)
    if eps > 0.0:
        # Residual discharge tail: the compensation zero misses the
        # integrator pole by the factor (1 - eps).
        zeros.append(-1.0 / ((1.0 - eps) * config.integrator_discharge))
        poles.append(-a_int)
        gain *= 1.0 - eps
    return np.array(zeros), np.array(poles), gain


@lru_cache(maxsize=None)
def _discrete_chain(config: DetectorChainConfig):
    """Bilinear-discretised chain as (sos, (z, p, k))."""
    z, p, k = _analog_zpk(config)
    zd, pd, kd = signal.bilinear_zpk(z, p, k, fs=1.0 / config.sample_interval)
    sos = signal.zpk2sos(zd, pd, kd)
    return sos, (zd, pd, kd)


def _filter_unit_pulse(
    config: DetectorChainConfig, pulse_duration: float, n_samples: int
) -> np.ndarray:
    """Uncalibrated response to one unit charge spread over a pulse."""
    sos, _ = _discrete_chain(config)
    dt = config.sample_interval
    width = max(1, int(round(pulse_duration / dt)))
    x = np.zeros(n_samples)
    x[:width] = 1.0 / width
    return signal.sosfilt(sos, x)


@lru_cache(maxsize=None)
def _calibration(
    config: DetectorChainConfig, pulse_duration: float, window_duration: float
) -> tuple[float, float]:
    """Gain and gate placement for unit capture of an isolated pulse.

    Returns ``(scale, offset)``: multiplying the raw filtered trace by
    ``scale`` makes the boxcar mean over ``window_duration`` starting at
    ``offset`` seconds after the pulse start equal the injected charge.
    """
    dt = config.sample_interval
    span = int(round(
        (pulse_duration + 12.0 * config.shaping_time + 4.0 * window_duration) / dt
    ))
    y = _filter_unit_pulse(config, pulse_duration, span)
    m = max(1, int(round(window_duration / dt)))
    sums = np.convolve(y, np.ones(m), mode="valid")
    best = int(np.argmax(sums))
    peak_mean = sums[best] / m
    if peak_mean <= 0:
        raise ConfigurationError("chain response has no positive capture window")
    return 1.0 / peak_mean, best * dt


def _charge_scale(config: DetectorChainConfig, pulse_duration: float) -> float:
    window = config.reference_window(pulse_duration)
    return _calibration(config, pulse_duration, window)[0]


def matched_window_offset(
    config: DetectorChainConfig,
    pulse_duration: float,
    window_duration: float | None = None,
) -> float:
    """Gate start, in seconds after the pulse start, maximising capture.

    Computed from the noiseless response of an isolated pulse; with the
    default window the captured fraction is unity by calibration.
    """
    if window_duration is None:
        window_duration = config.reference_window(pulse_duration)
    return _calibration(config, pulse_duration, window_duration)[1]


def chain_transfer_power(
    config: DetectorChainConfig, frequencies: np.ndarray
) -> ChainResponse:
    """Squared transfer gain of the calibrated chain at ``frequencies``.

    Evaluates the discretised chain actually used for filtering, scaled
    by the delta-pulse calibration, so that the squared magnitude of a
    filtered trace's spectrum matches this response on its whole band.
    The gain is exactly zero at DC: AC coupling removes the mean.
    """
    f = np.asarray(frequencies, dtype=np.float64)
    if np.any(f < 0):
        raise ConfigurationError("frequencies must be >= 0")
    nyq = 0.5 / config.sample_interval
    if np.any(f > nyq * (1 + 1e-12)):
        raise ConfigurationError("frequencies beyond Nyquist requested")
    _, (zd, pd, kd) = _discrete_chain(config)
    w = 2.0 * np.pi * f * config.sample_interval
    _, h = signal.freqz_zpk(zd, pd, kd, worN=w)
    scale = _charge_scale(config, config.sample_interval)
    return ChainResponse(frequencies=f, gain_power=np.abs(scale * h) ** 2)


def impulse_response(
    config: DetectorChainConfig, duration: float = 20e-6
) -> Trace:
    """Noiseless calibrated response to one electron in a single sample.

    ``duration`` must cover several shaping times; covering a few
    discharge times as well makes transform-domain checks of the slow
    AC-coupling behaviour meaningful.
    """
    if duration < 5 * config.shaping_time:
        raise ConfigurationError(
            "duration too short to contain the shaped pulse"
        )
    dt = config.sample_interval
    n = int(round(duration / dt))
    y = _filter_unit_pulse(config, dt, n)
    return Trace(samples=_charge_scale(config, dt) * y, sample_interval=dt)


def _electronic_noise_sigma(
    config: DetectorChainConfig, pulse_duration: float
) -> float:
    """Per-sample white noise level realising the quoted ENC.

    A boxcar average of m independent samples of standard deviation
    sigma has standard deviation sigma/sqrt(m); choosing
    sigma = ENC * sqrt(m) over the reference window makes the gated
    noise equal the ENC by construction.
    """
    m = max(1, int(round(
        config.reference_window(pulse_duration) / config.sample_interval
    )))
    return config.enc_electrons * math.sqrt(m)


def synthesize_trace(
    pulses: list[PulseChargeSample],
    spec: CoherentPulseTrainSpec,
    config: DetectorChainConfig,
    seed: int | np.random.SeedSequence,
    lead_in: float = DEFAULT_LEAD_IN,
    tail: float | None = None,
) -> Trace:
    """Render a sampled output trace for a train of pulse charges.

    Each pulse injects its differential charge uniformly across the
    optical pulse duration at its slot in the train; the result is
    filtered through the discretised chain, calibrated, and overlaid
    with white electronic noise at the configured ENC.  ``seed`` drives
    only the electronic noise; the photon randomness lives in ``pulses``.
    """
    if spec.repetition_period <= spec.pulse_duration:
        raise ConfigurationError("repetition period shorter than the pulse")
    if config.integrator_discharge < 10 * spec.pulse_duration:
        raise ConfigurationError(
            "integrator_discharge must be >= 10x the pulse duration"
        )
    if lead_in < 0:
        raise ConfigurationError(f"lead_in must be >= 0, got {lead_in}")
    if tail is None:
        tail = max(spec.repetition_period, 6.0 * config.shaping_time)

    dt = config.sample_interval
    width = max(1, int(round(spec.pulse_duration / dt)))
    period = spec.repetition_period / dt
    n = int(round((lead_in + spec.pulse_count * spec.repetition_period + tail) / dt))

    charge = np.zeros(n)
    start0 = int(round(lead_in / dt))
    diffs = np.array([p.differential_electrons for p in pulses], dtype=np.float64)
    starts = start0 + np.round(np.arange(len(diffs)) * period).astype(np.int64)
    if starts[-1] + width > n:
        raise ConfigurationError("train does not fit in the synthesized span")
    idx = starts[:, None] + np.arange(width)[None, :]
    charge[idx.ravel()] = np.repeat(diffs / width, width)

    sos, _ = _discrete_chain(config)
    y = _charge_scale(config, spec.pulse_duration) * signal.sosfilt(sos, charge)

    if config.enc_electrons > 0:
        rng = np.random.default_rng(seed)
        y = y + rng.normal(
            0.0, _electronic_noise_sigma(config, spec.pulse_duration), n
        )
    return Trace(samples=y, sample_interval=dt)


def synthesize_cw_trace(
    photon_flux: float,
    duration: float,
    config: DetectorChainConfig,
    seed: int | np.random.SeedSequence,
    detection_efficiency: float = 0.9,
    imbalance: float = 0.0,
) -> Trace:
    """Render a trace under continuous illumination.

    Photoelectrons arrive on each diode as independent per-sample
    Poisson counts at half the detected flux (split by imbalance); the
    differential count stream passes through the same chain and noise
    model as the pulsed path.  Calibration uses the single-sample charge
    response, so spectra of these traces sit on the chain's transfer
    power times the flat shot-noise density of the detected flux.
    """
    if photon_flux < 0:
        raise ConfigurationError(f"photon_flux must be >= 0, got {photon_flux}")
    if not 0.0 < detection_efficiency <= 1.0:
        raise ConfigurationError(
            f"detection_efficiency must lie in (0, 1], got {detection_efficiency}"
        )
    if not -1.0 <= imbalance <= 1.0:
        raise ConfigurationError(f"imbalance must lie in [-1, 1], got {imbalance}")
    dt = config.sample_interval
    n = int(round(duration / dt))
    if n < 2:
        raise ConfigurationError("duration too short for the sampling interval")

    rng = np.random.default_rng(seed)
    half_rate = 0.5 * detection_efficiency * photon_flux * dt
    n1 = rng.poisson(half_rate * (1.0 + imbalance), n).astype(np.float64)
    n2 = rng.poisson(half_rate * (1.0 - imbalance), n).astype(np.float64)

    sos, _ = _discrete_chain(config)
    y = _charge_scale(config, dt) * signal.sosfilt(sos, n1 - n2)
    if config.enc_electrons > 0:
        y = y + rng.normal(0.0, _electronic_noise_sigma(config, dt), n)
    return Trace(samples=y, sample_interval=dt)


def quantize_trace(trace: Trace, bits: int = 8, full_scale: float | None = None) -> Trace:
    """Apply a symmetric uniform quantizer to a trace (opt-in).

    ``full_scale`` defaults to the trace's own peak magnitude; samples
    beyond it clip.  Models the effective resolution of the digitiser.
    """
    if bits < 1:
        raise ConfigurationError(f"bits must be >= 1, got {bits}")
    if full_scale is None:
        full_scale = float(np.max(np.abs(trace.samples)))
    if full_scale <= 0:
        raise ConfigurationError("full_scale must be > 0")
    levels = 2 ** (bits - 1)
    step = full_scale / levels
    q = np.clip(np.round(trace.samples / step), -levels, levels - 1) * step
    return replace(trace, samples=q)
