"""Temporal gating windows and their power spectra.

Two unit-area window shapes are supported for extracting per-pulse
observables from a sampled trace:

``boxcar``
    A plain average of duration ``sigma`` centred on the gate time: the
    minimum-variance gate for white noise, but fully exposed to baseline
    offsets and slow drifts.

``dcs``
    Double correlated sampling: the average over the central ``sigma``
    minus the average of two flanking half-windows.  Constant offsets
    cancel exactly and linear drifts cancel by symmetry, at the price of
    twice the white-noise variance and a 2*sigma footprint.

``window_value`` evaluates the window function itself, centred at the
gate time with half-open sample ownership ``(left, right]`` so that a
sampled window never double-counts an edge.  The power spectra are the
squared magnitudes of the windows' Fourier transforms and multiply a
two-sided noise density to predict the gated variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "WINDOW_KINDS",
    "GatingWindow",
    "window_value",
    "boxcar_power_spectrum",
    "dcs_power_spectrum",
    "window_power_spectrum",
    "sampled_window",
]

WINDOW_KINDS = ("boxcar", "dcs")


@dataclass(frozen=True)
class GatingWindow:
    """A gating window of a given kind and duration.

    ``offset`` is the start time of the first gate relative to the trace
    origin; ``None`` lets analysis routines place the gate for maximum
    pulse capture.
    """

    kind: str
    duration: float          # seconds; central section length
    offset: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in WINDOW_KINDS:
            raise ConfigurationError(
                f"window kind must be one of {WINDOW_KINDS}, got {self.kind!r}"
            )
        if self.duration <= 0:
            raise ConfigurationError(
                f"window duration must be > 0, got {self.duration}"
            )

    @property
    def footprint(self) -> float:
        """Total time span touched by the window."""
        return self.duration if self.kind == "boxcar" else 2.0 * self.duration


def _step(x: np.ndarray) -> np.ndarray:
    # Unit step with the half-open convention: 0 for x <= 0, 1 for x > 0.
    return (x > 0.0).astype(np.float64)


def window_value(window: GatingWindow, times: np.ndarray, center: float = 0.0) -> np.ndarray:
    """Evaluate the window function at ``times``, centred at ``center``.

    The boxcar is 1/sigma on (center - sigma/2, center + sigma/2]; the
    dcs window is 2/sigma on that interval minus 1/sigma on
    (center - sigma, center + sigma], i.e. -1/sigma on the flanks.
    """
    t = np.asarray(times, dtype=np.float64) - center
    s = window.duration
    inner = (_step(t + 0.5 * s) - _step(t - 0.5 * s)) / s
    if window.kind == "boxcar":
        return inner
    outer = (_step(t + s) - _step(t - s)) / s
    return 2.0 * inner - outer


def boxcar_power_spectrum(duration: float, omega: np.ndarray) -> np.ndarray:
    """|W(omega)|^2 of the unit-area boxcar of length ``duration``.

    Equals sinc^2(omega * duration / 2): unity at DC, first null at
    omega = 2*pi/duration.
    """
    u = 0.5 * np.asarray(omega, dtype=np.float64) * duration
    return np.sinc(u / np.pi) ** 2


def dcs_power_spectrum(duration: float, omega: np.ndarray) -> np.ndarray:
    """|W(omega)|^2 of the dcs window with central length ``duration``.

    Equals 4 * (sinc(u) - sinc(2u))^2 with u = omega * duration / 2; the
    leading behaviour at DC is quartic in omega, which is what removes
    offsets and slow drifts.
    """
    u = 0.5 * np.asarray(omega, dtype=np.float64) * duration
    return 4.0 * (np.sinc(u / np.pi) - np.sinc(2.0 * u / np.pi)) ** 2


def window_power_spectrum(window: GatingWindow, omega: np.ndarray) -> np.ndarray:
    """Dispatch to the power spectrum of ``window``'s kind."""
    if window.kind == "boxcar":
        return boxcar_power_spectrum(window.duration, omega)
    return dcs_power_spectrum(window.duration, omega)


def sampled_window(
    window: GatingWindow, sample_interval: float, span: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Sample the window on a symmetric grid for numeric checks.

    Returns ``(times, values)`` with samples at half-interval offsets so
    that the window edges fall between samples whenever the span and
    interval are commensurate; the discrete sum then reproduces the
    continuous integrals of a piecewise-constant window exactly.
    """
    if sample_interval <= 0:
        raise ConfigurationError(
            f"sample_interval must be > 0, got {sample_interval}"
        )
    if span is None:
        span = 2.0 * window.footprint
    n = int(round(span / sample_interval))
    if n < 2:
        raise ConfigurationError("span too short for the requested sampling")
    times = (np.arange(n) + 0.5) * sample_interval - 0.5 * span
    return times, window_value(window, times)
