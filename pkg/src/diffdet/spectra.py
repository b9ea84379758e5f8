"""Spectral estimation and transform-domain noise prediction.

Power spectral densities are estimated with Welch averaging over
non-overlapping rectangular segments of power-of-two length, one-sided,
with the segment mean removed.  For a white trace of per-sample variance
v the density is flat at 2 * v * dt, and the integral of the density
over the band recovers the trace variance (Parseval) up to the removed
mean.

``predict_pulsed_noise`` folds a measured density with the power
spectrum of a gating window to predict the variance of gated pulse
areas without ever forming the areas themselves; comparing it against
directly gated traces is the main cross-check between the time-domain
and transform-domain halves of the package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .chain import ChainResponse, Trace
from .errors import AnalysisError, ConfigurationError
from .windows import GatingWindow, window_power_spectrum

__all__ = [
    "SpectrumEstimate",
    "estimate_psd",
    "band_edge_frequency",
    "predict_pulsed_noise",
    "extract_transimpedance",
    "signal_to_electronic_ratio",
]


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """A one-sided power spectral density estimate."""

    frequencies: np.ndarray        # Hz, starting at 0
    power_density: np.ndarray      # unit^2 / Hz
    resolution_bandwidth: float    # Hz, grid spacing
    segment_count: int
    unit: str = "pe"

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "frequencies", np.asarray(self.frequencies, dtype=np.float64)
        )
        object.__setattr__(
            self, "power_density", np.asarray(self.power_density, dtype=np.float64)
        )
        if self.frequencies.shape != self.power_density.shape:
            raise ConfigurationError("frequency and density arrays must match")

    @property
    def nyquist(self) -> float:
        return float(self.frequencies[-1])

    def band_power(self) -> float:
        """Integral of the density over the band (trapezoid rule)."""
        return float(np.trapezoid(self.power_density, self.frequencies))


def estimate_psd(trace: Trace, segment_length: int = 4096) -> SpectrumEstimate:
    """Welch estimate of the one-sided PSD of a trace.

    ``segment_length`` must be a power of two and the trace must contain
    at least two full segments; more segments shrink the estimator
    variance as 1/sqrt(count).
    """
    if segment_length < 2 or segment_length & (segment_length - 1):
        raise ConfigurationError(
            f"segment_length must be a power of two >= 2, got {segment_length}"
        )
    n_seg = len(trace) // segment_length
    if n_seg < 2:
        raise AnalysisError(
            f"trace of {len(trace)} samples is too short for two "
            f"segments of {segment_length}"
        )
    fs = 1.0 / trace.sample_interval
    f, p = signal.welch(
        trace.samples,
        fs=fs,
        window="boxcar",
        nperseg=segment_length,
        noverlap=0,
        detrend="constant",
        scaling="density",
        return_onesided=True,
    )
    return SpectrumEstimate(
        frequencies=f,
        power_density=p,
        resolution_bandwidth=fs / segment_length,
        segment_count=n_seg,
        unit=trace.unit,
    )


def band_edge_frequency(
    frequencies: np.ndarray, power: np.ndarray, fraction: float = 0.5
) -> float:
    """Highest frequency where ``power`` still reaches ``fraction`` of peak.

    Linearly interpolates the final downward crossing; used for -3 dB
    style bandwidth readings on responses and spectra.
    """
    f = np.asarray(frequencies, dtype=np.float64)
    p = np.asarray(power, dtype=np.float64)
    peak = float(np.max(p))
    if peak <= 0:
        raise AnalysisError("power has no positive peak to reference")
    level = fraction * peak
    above = np.nonzero(p >= level)[0]
    if above.size == 0:
        raise AnalysisError("power never reaches the requested fraction of peak")
    i = int(above[-1])
    if i == f.size - 1:
        return float(f[-1])
    # Interpolate between the last point above and the next below.
    f0, f1 = f[i], f[i + 1]
    p0, p1 = p[i], p[i + 1]
    if p1 == p0:
        return float(f0)
    return float(f0 + (level - p0) * (f1 - f0) / (p1 - p0))


def predict_pulsed_noise(
    spectrum: SpectrumEstimate, window: GatingWindow
) -> float:
    """Predict the gated-area variance from a measured density.

    Integrates density x window power over the one-sided band.  Requires
    the spectrum to cover the window's support: the window power at the
    top of the grid must be below 1e-3 of its peak, otherwise the
    truncated integral silently underestimates and an analysis error is
    raised instead.  The zero-frequency bin of a mean-removed estimate
    holds no information, so it is patched with its neighbour before
    integrating; only the boxcar window has any weight there.
    """
    f = spectrum.frequencies
    wp = window_power_spectrum(window, 2.0 * np.pi * f)
    peak = float(np.max(wp))
    edge = float(wp[-1])
    if peak <= 0:
        raise AnalysisError("window power spectrum vanished on the grid")
    if edge > 1e-3 * peak:
        raise AnalysisError(
            "spectrum band ends before the window spectrum decays: "
            f"window power at {f[-1]:.3g} Hz is {edge / peak:.2e} of peak "
            "(limit 1e-3); use a shorter sampling interval or a wider window"
        )
    density = spectrum.power_density.copy()
    if density.size > 1:
        density[0] = density[1]
    return float(np.trapezoid(density * wp, f))


def extract_transimpedance(
    lit: SpectrumEstimate,
    dark: SpectrumEstimate,
    drive_density: float,
) -> ChainResponse:
    """Recover the chain's squared gain from lit and dark spectra.

    Under continuous illumination the detected photoelectron stream is
    white with known one-sided density ``drive_density`` (in electrons^2
    per hertz), so the excess of the lit density over the dark density,
    divided by the drive, is the squared transfer gain.  Bins where the
    subtraction goes negative are clamped to zero.
    """
    if drive_density <= 0:
        raise ConfigurationError(
            f"drive_density must be > 0, got {drive_density}"
        )
    if lit.frequencies.shape != dark.frequencies.shape or not np.allclose(
        lit.frequencies, dark.frequencies, rtol=1e-9, atol=0.0
    ):
        raise AnalysisError("lit and dark spectra are on different grids")
    excess = np.clip(lit.power_density - dark.power_density, 0.0, None)
    return ChainResponse(
        frequencies=lit.frequencies.copy(), gain_power=excess / drive_density
    )


def signal_to_electronic_ratio(
    lit: SpectrumEstimate, dark: SpectrumEstimate
) -> np.ndarray:
    """Per-bin ratio of lit to dark density in decibels.

    Bins where the dark density is not positive carry no usable
    reference and come back as NaN.
    """
    if lit.frequencies.shape != dark.frequencies.shape or not np.allclose(
        lit.frequencies, dark.frequencies, rtol=1e-9, atol=0.0
    ):
        raise AnalysisError("lit and dark spectra are on different grids")
    out = np.full(lit.power_density.shape, np.nan)
    ok = (dark.power_density > 0.0) & (lit.power_density > 0.0)
    out[ok] = 10.0 * np.log10(lit.power_density[ok] / dark.power_density[ok])
    return out
