"""Photon statistics of a pulsed coherent source on a balanced diode pair.

Each light pulse is split onto two photodiodes wired in opposition.  For
coherent light the photoelectron counts on the two diodes are independent
Poisson variates, so the differential count keeps the full shot noise of
the pair while common-mode intensity drifts cancel to first order.  A
static splitting imbalance moves mean signal into the difference without
changing its shot variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "CoherentPulseTrainSpec",
    "PulseChargeSample",
    "sample_pulse_train",
    "expected_shot_variance",
    "expected_differential_mean",
]


@dataclass(frozen=True)
class CoherentPulseTrainSpec:
    """Source and geometry parameters of a pulsed run.

    Attributes
    ----------
    mean_photon_number:
        Mean photons per pulse, summed over both diodes.
    pulse_duration:
        Optical pulse length in seconds (rectangular envelope).
    repetition_period:
        Pulse-to-pulse spacing in seconds.
    pulse_count:
        Number of pulses in the train.
    detection_efficiency:
        Photoelectrons produced per incident photon, in (0, 1].
    imbalance:
        Static splitting asymmetry (P1 - P2) / (P1 + P2), in [-1, 1].
    """

    mean_photon_number: float
    pulse_duration: float = 1e-6
    repetition_period: float = 10e-6
    pulse_count: int = 500
    detection_efficiency: float = 0.9
    imbalance: float = 0.0

    def __post_init__(self) -> None:
        if self.mean_photon_number < 0:
            raise ConfigurationError(
                f"mean_photon_number must be >= 0, got {self.mean_photon_number}"
            )
        if self.pulse_duration <= 0:
            raise ConfigurationError(
                f"pulse_duration must be > 0, got {self.pulse_duration}"
            )
        if self.repetition_period <= self.pulse_duration:
            raise ConfigurationError(
                "repetition_period must exceed pulse_duration: "
                f"{self.repetition_period} <= {self.pulse_duration}"
            )
        if self.pulse_count < 1:
            raise ConfigurationError(
                f"pulse_count must be >= 1, got {self.pulse_count}"
            )
        if not 0.0 < self.detection_efficiency <= 1.0:
            raise ConfigurationError(
                "detection_efficiency must lie in (0, 1], got "
                f"{self.detection_efficiency}"
            )
        if not -1.0 <= self.imbalance <= 1.0:
            raise ConfigurationError(
                f"imbalance must lie in [-1, 1], got {self.imbalance}"
            )

    @property
    def branch_rates(self) -> tuple[float, float]:
        """Mean photoelectrons per pulse on diode 1 and diode 2."""
        half = 0.5 * self.detection_efficiency * self.mean_photon_number
        return half * (1.0 + self.imbalance), half * (1.0 - self.imbalance)

    @property
    def train_duration(self) -> float:
        """Time from the start of the first pulse to the end of the last period."""
        return self.pulse_count * self.repetition_period


@dataclass(frozen=True)
class PulseChargeSample:
    """Photoelectron counts generated by one pulse."""

    index: int
    differential_electrons: float  # diode 1 minus diode 2
    total_electrons: float         # diode 1 plus diode 2


def sample_pulse_train(
    spec: CoherentPulseTrainSpec, seed: int | np.random.SeedSequence
) -> list[PulseChargeSample]:
    """Draw per-pulse photoelectron counts for every pulse in the train.

    Counts on the two diodes are sampled as independent Poisson variates
    with the branch rates of ``spec``; the generator is exact for any
    rate, so large pulses need no Gaussian fallback.  The same seed
    always yields the same train.
    """
    rng = np.random.default_rng(seed)
    lam1, lam2 = spec.branch_rates
    n1 = rng.poisson(lam1, spec.pulse_count).astype(np.float64)
    n2 = rng.poisson(lam2, spec.pulse_count).astype(np.float64)
    return [
        PulseChargeSample(index=i, differential_electrons=n1[i] - n2[i],
                          total_electrons=n1[i] + n2[i])
        for i in range(spec.pulse_count)
    ]


def expected_shot_variance(spec: CoherentPulseTrainSpec) -> float:
    """Variance of the differential photoelectron count per pulse.

    The difference of two independent Poisson counts has variance equal
    to the sum of their means, so the shot variance is the total mean
    photoelectron number regardless of the splitting imbalance.
    """
    lam1, lam2 = spec.branch_rates
    return lam1 + lam2


def expected_differential_mean(spec: CoherentPulseTrainSpec) -> float:
    """Mean differential photoelectron count per pulse."""
    lam1, lam2 = spec.branch_rates
    return lam1 - lam2
