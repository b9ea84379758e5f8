"""Gated pulse-area extraction and shot-noise scaling analysis.

Per-pulse observables are boxcar or double-correlated-sampling (dcs)
averages of the calibrated trace, one gate per repetition period.  Gate
times are quantised to the sample grid; dcs gates are additionally
snapped to an even sample count so the two half-length flanks average a
whole number of samples each, which is what makes offset cancellation
exact and linear-drift cancellation symmetric.

``noise_scaling`` maps the variance of gated areas against the mean
photon number and decomposes it into an electronic floor, a linear
(shot) term and a quadratic (classical) term, the central figure of
merit being the photon number at which shot noise crosses the
electronic floor.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .chain import (
    DEFAULT_LEAD_IN,
    DetectorChainConfig,
    Trace,
    _electronic_noise_sigma,
    matched_window_offset,
    synthesize_trace,
)
from .errors import AnalysisError, ConfigurationError
from .photons import CoherentPulseTrainSpec, sample_pulse_train
from .windows import GatingWindow

__all__ = [
    "PulseAreas",
    "integrate_boxcar",
    "integrate_dcs",
    "gate_pulse_areas",
    "pulse_variance",
    "resolve_window",
    "ScalingFit",
    "fit_noise_scaling",
    "NoiseScalingResult",
    "noise_scaling",
    "WindowOptimization",
    "optimize_window",
    "ClassicalNoiseReport",
    "classical_noise_check",
]


@dataclass(frozen=True, eq=False)
class PulseAreas:
    """Gated per-pulse areas extracted from one trace."""

    values: np.ndarray
    window: GatingWindow          # with the resolved gate start
    repetition_period: float
    unit: str = "pe"
    calibrated: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "values", np.asarray(self.values, dtype=np.float64)
        )

    def __len__(self) -> int:
        return self.values.size


def _gate_starts(
    trace: Trace,
    offset: float,
    repetition_period: float,
    pulse_count: int,
) -> np.ndarray:
    if repetition_period <= 0:
        raise ConfigurationError(
            f"repetition_period must be > 0, got {repetition_period}"
        )
    if pulse_count < 1:
        raise ConfigurationError(f"pulse_count must be >= 1, got {pulse_count}")
    dt = trace.sample_interval
    rel = (offset - trace.origin_time) / dt
    return np.round(rel + np.arange(pulse_count) * (repetition_period / dt)) \
        .astype(np.int64)


def _window_samples(window: GatingWindow, dt: float) -> int:
    m = int(round(window.duration / dt))
    if window.kind == "dcs":
        m -= m % 2
    if m < 1:
        raise AnalysisError(
            f"window duration {window.duration:g} s is too short for the "
            f"sampling interval {dt:g} s"
        )
    return m


def _segment_means(samples: np.ndarray, starts: np.ndarray, m: int) -> np.ndarray:
    idx = starts[:, None] + np.arange(m)[None, :]
    return samples[idx].mean(axis=1)


def integrate_boxcar(
    trace: Trace,
    window: GatingWindow,
    repetition_period: float,
    pulse_count: int,
) -> PulseAreas:
    """Boxcar gate: mean of the trace over each per-pulse window.

    Gate i covers ``window.offset + i * repetition_period`` onward for
    one window duration, rounded to whole samples.  The gate grid must
    lie entirely inside the trace.
    """
    if window.kind != "boxcar":
        raise ConfigurationError(f"expected a boxcar window, got {window.kind!r}")
    if window.offset is None:
        raise ConfigurationError(
            "window offset is required here; resolve it first, e.g. with "
            "matched_window_offset"
        )
    dt = trace.sample_interval
    m = _window_samples(window, dt)
    if m * dt > repetition_period:
        raise AnalysisError(
            f"boxcar of {m} samples exceeds the repetition period"
        )
    starts = _gate_starts(trace, window.offset, repetition_period, pulse_count)
    if starts[0] < 0 or starts[-1] + m > len(trace):
        raise AnalysisError(
            f"gates [{starts[0]}, {starts[-1] + m}) fall outside the trace "
            f"of {len(trace)} samples"
        )
    values = _segment_means(trace.samples, starts, m)
    used = dataclasses.replace(window, duration=m * dt)
    return PulseAreas(
        values=values,
        window=used,
        repetition_period=repetition_period,
        unit=trace.unit,
        calibrated=trace.calibrated,
    )


def integrate_dcs(
    trace: Trace,
    window: GatingWindow,
    repetition_period: float,
    pulse_count: int,
) -> PulseAreas:
    """Double correlated sampling gate around each pulse.

    The mean over the central section (placed exactly like the boxcar
    gate) minus the mean over two flanking half-sections immediately
    before and after it.  Adjacent gates must not overlap: the 2x window
    footprint has to fit in the repetition period.
    """
    if window.kind != "dcs":
        raise ConfigurationError(f"expected a dcs window, got {window.kind!r}")
    if window.offset is None:
        raise ConfigurationError(
            "window offset is required here; resolve it first, e.g. with "
            "matched_window_offset"
        )
    dt = trace.sample_interval
    m = _window_samples(window, dt)
    half = m // 2
    if 2 * m * dt > repetition_period * (1 + 1e-12):
        raise AnalysisError(
            f"dcs footprint of {2 * m} samples exceeds the repetition "
            "period; flanks of consecutive gates would collide"
        )
    starts = _gate_starts(trace, window.offset, repetition_period, pulse_count)
    if starts[0] - half < 0 or starts[-1] + m + half > len(trace):
        raise AnalysisError(
            f"gates [{starts[0] - half}, {starts[-1] + m + half}) fall "
            f"outside the trace of {len(trace)} samples"
        )
    central = _segment_means(trace.samples, starts, m)
    pre = _segment_means(trace.samples, starts - half, half)
    post = _segment_means(trace.samples, starts + m, half)
    values = central - 0.5 * (pre + post)
    used = dataclasses.replace(window, duration=m * dt)
    return PulseAreas(
        values=values,
        window=used,
        repetition_period=repetition_period,
        unit=trace.unit,
        calibrated=trace.calibrated,
    )


def gate_pulse_areas(
    trace: Trace,
    window: GatingWindow,
    repetition_period: float,
    pulse_count: int,
) -> PulseAreas:
    """Dispatch to the integrator matching ``window.kind``."""
    if window.kind == "boxcar":
        return integrate_boxcar(trace, window, repetition_period, pulse_count)
    return integrate_dcs(trace, window, repetition_period, pulse_count)


def pulse_variance(areas: PulseAreas | np.ndarray) -> float:
    """Population variance of the gated areas."""
    values = areas.values if isinstance(areas, PulseAreas) else np.asarray(areas)
    if values.size < 1:
        raise AnalysisError("no areas to take a variance over")
    return float(np.var(values))


def resolve_window(
    window: GatingWindow,
    spec: CoherentPulseTrainSpec,
    config: DetectorChainConfig,
    lead_in: float = DEFAULT_LEAD_IN,
) -> GatingWindow:
    """Fill in a matched gate start when the window has none.

    The gate is placed where a noiseless isolated pulse deposits the
    most charge into it, which by construction captures the calibrated
    charge exactly for the default window.
    """
    if window.offset is not None:
        return window
    m = _window_samples(window, config.sample_interval)
    offset = lead_in + matched_window_offset(
        config, spec.pulse_duration, m * config.sample_interval
    )
    return dataclasses.replace(window, offset=offset)


@dataclass(frozen=True)
class ScalingFit:
    """Quadratic decomposition of area variance against photon number."""

    electronic_variance: float
    linear_coeff: float
    quadratic_coeff: float
    electronic_se: float
    linear_se: float
    quadratic_se: float
    fixed_intercept: bool


def _wls(X: np.ndarray, y: np.ndarray, w: np.ndarray):
    cov = np.linalg.inv(X.T @ (X * w[:, None]))
    beta = cov @ (X.T @ (w * y))
    return beta, cov


def fit_noise_scaling(
    photon_numbers: np.ndarray,
    variances: np.ndarray,
    electronic_variance: float | None = None,
    weight_count: int | None = None,
) -> ScalingFit:
    """Fit variance = a + b*N + c*N^2 over a photon-number grid.

    With ``electronic_variance`` given, the intercept a is pinned to the
    independently measured floor and only (b, c) are fitted; otherwise
    all three parameters are free.  ``weight_count`` is the effective
    number of gated windows behind each variance point: when given, the
    points are weighted by the chi-square variance of a sample variance,
    Var(v) ~ 2 v^2 / count, iterating the weights on the fitted model;
    parameter errors then come from the weighted normal matrix.
    Unweighted fits get ordinary least-squares errors instead.
    """
    nb = np.asarray(photon_numbers, dtype=np.float64)
    v = np.asarray(variances, dtype=np.float64)
    if nb.shape != v.shape or nb.ndim != 1:
        raise ConfigurationError("photon_numbers and variances must be 1-d and equal length")
    fixed = electronic_variance is not None
    n_par = 2 if fixed else 3
    if nb.size < n_par:
        raise ConfigurationError(
            f"need at least {n_par} grid points, got {nb.size}"
        )
    if fixed:
        X = np.column_stack([nb, nb * nb])
        y = v - electronic_variance
    else:
        X = np.column_stack([np.ones_like(nb), nb, nb * nb])
        y = v

    w = np.ones_like(y)
    beta, cov = _wls(X, y, w)
    if weight_count is not None:
        if weight_count < 2:
            raise ConfigurationError(
                f"weight_count must be >= 2, got {weight_count}"
            )
        for _ in range(4):
            model = X @ beta + (electronic_variance if fixed else 0.0)
            model = np.maximum(model, 1e-300)
            w = weight_count / (2.0 * model * model)
            beta, cov = _wls(X, y, w)
        ses = np.sqrt(np.diag(cov))
    else:
        dof = nb.size - n_par
        if dof > 0:
            resid = y - X @ beta
            s2 = float(resid @ resid) / dof
            ses = np.sqrt(s2 * np.diag(cov))
        else:
            ses = np.full(n_par, np.nan)

    if fixed:
        return ScalingFit(
            electronic_variance=float(electronic_variance),
            linear_coeff=float(beta[0]),
            quadratic_coeff=float(beta[1]),
            electronic_se=np.nan,
            linear_se=float(ses[0]),
            quadratic_se=float(ses[1]),
            fixed_intercept=True,
        )
    return ScalingFit(
        electronic_variance=float(beta[0]),
        linear_coeff=float(beta[1]),
        quadratic_coeff=float(beta[2]),
        electronic_se=float(ses[0]),
        linear_se=float(ses[1]),
        quadratic_se=float(ses[2]),
        fixed_intercept=False,
    )


@dataclass(frozen=True, eq=False)
class NoiseScalingResult:
    """Full outcome of a noise-scaling run."""

    photon_numbers: np.ndarray
    variances: np.ndarray
    variance_ses: np.ndarray
    window: GatingWindow
    electronic_variance: float
    electronic_se: float
    linear_coeff: float
    linear_se: float
    quadratic_coeff: float
    quadratic_se: float
    loglog_slope: float
    loglog_slope_se: float
    n_3db: float
    enc: float
    replicates: int
    pulse_count: int
    dark_window_count: int


def _dark_variance(
    sigma_sample: float,
    m: int,
    kind: str,
    dark_windows: int,
    seed: np.random.SeedSequence,
) -> tuple[float, float]:
    """Electronic-floor variance of the gate from a light-free run.

    Tiles a pure-noise stream with back-to-back gates (stride one
    footprint) so thousands of windows come from a short stream.
    """
    rng = np.random.default_rng(seed)
    if kind == "boxcar":
        noise = rng.normal(0.0, sigma_sample, dark_windows * m)
        areas = noise.reshape(dark_windows, m).mean(axis=1)
    else:
        half = m // 2
        block = rng.normal(0.0, sigma_sample, dark_windows * 2 * m) \
            .reshape(dark_windows, 2 * m)
        pre = block[:, :half].mean(axis=1)
        central = block[:, half:half + m].mean(axis=1)
        post = block[:, half + m:].mean(axis=1)
        areas = central - 0.5 * (pre + post)
    var = float(np.var(areas))
    return var, var * math.sqrt(2.0 / dark_windows)


def noise_scaling(
    spec: CoherentPulseTrainSpec,
    photon_numbers: np.ndarray,
    config: DetectorChainConfig,
    window: GatingWindow,
    seed: int | np.random.SeedSequence,
    replicates: int = 1,
    dark_windows: int = 4096,
    lead_in: float = DEFAULT_LEAD_IN,
) -> NoiseScalingResult:
    """Measure gated-area variance across a photon-number grid.

    For each grid point the source of ``spec`` is re-run at that mean
    photon number (``replicates`` independent trains, variances
    averaged).  The electronic floor is measured separately on a
    light-free tiled run with the same gate, and the scaling fit pins
    its intercept to that floor.  The log-log slope is fitted on the
    floor-subtracted variances over the points where the light term is
    at least as large as the floor.

    All randomness derives from ``seed``; the same seed reproduces the
    result bit for bit.
    """
    nb_grid = np.asarray(photon_numbers, dtype=np.float64)
    if nb_grid.ndim != 1 or nb_grid.size < 2:
        raise ConfigurationError("photon_numbers must be a 1-d grid of >= 2 points")
    if np.any(nb_grid < 0):
        raise ConfigurationError("photon numbers must be >= 0")
    if replicates < 1:
        raise ConfigurationError(f"replicates must be >= 1, got {replicates}")
    if dark_windows < 16:
        raise ConfigurationError(f"dark_windows must be >= 16, got {dark_windows}")

    dt = config.sample_interval
    m = _window_samples(window, dt)
    window = resolve_window(window, spec, config, lead_in=lead_in)

    ss = seed if isinstance(seed, np.random.SeedSequence) \
        else np.random.SeedSequence(seed)
    children = ss.spawn(nb_grid.size * replicates + 1)
    dark_seed, run_seeds = children[0], children[1:]

    variances = np.empty(nb_grid.size)
    ses = np.empty(nb_grid.size)
    k_eff = replicates * spec.pulse_count
    for i, nb in enumerate(nb_grid):
        vs = []
        for j in range(replicates):
            s_ph, s_el = run_seeds[i * replicates + j].spawn(2)
            run_spec = dataclasses.replace(spec, mean_photon_number=float(nb))
            pulses = sample_pulse_train(run_spec, s_ph)
            trace = synthesize_trace(pulses, run_spec, config, s_el, lead_in=lead_in)
            areas = gate_pulse_areas(
                trace, window, spec.repetition_period, spec.pulse_count
            )
            vs.append(pulse_variance(areas))
        variances[i] = np.mean(vs)
        ses[i] = variances[i] * math.sqrt(2.0 / k_eff)

    if config.enc_electrons > 0:
        sigma_sample = _electronic_noise_sigma(config, spec.pulse_duration)
        floor, floor_se = _dark_variance(
            sigma_sample, m, window.kind, dark_windows, dark_seed
        )
    else:
        floor, floor_se = 0.0, 0.0

    fit = fit_noise_scaling(
        nb_grid, variances, electronic_variance=floor, weight_count=k_eff
    )

    light = variances - floor
    mask = light >= np.maximum(floor, 1e-300)
    if floor == 0.0:
        mask = light > 0.0
    slope, slope_se = np.nan, np.nan
    if int(mask.sum()) >= 2:
        x = np.log(nb_grid[mask])
        y = np.log(light[mask])
        coef = np.polyfit(x, y, 1)
        slope = float(coef[0])
        if int(mask.sum()) > 2:
            resid = y - np.polyval(coef, x)
            s2 = float(resid @ resid) / (mask.sum() - 2)
            slope_se = math.sqrt(s2 / float(np.sum((x - x.mean()) ** 2)))

    n_3db = floor / fit.linear_coeff if fit.linear_coeff > 0 else np.nan
    return NoiseScalingResult(
        photon_numbers=nb_grid,
        variances=variances,
        variance_ses=ses,
        window=window,
        electronic_variance=floor,
        electronic_se=floor_se,
        linear_coeff=fit.linear_coeff,
        linear_se=fit.linear_se,
        quadratic_coeff=fit.quadratic_coeff,
        quadratic_se=fit.quadratic_se,
        loglog_slope=slope,
        loglog_slope_se=slope_se,
        n_3db=float(n_3db),
        enc=math.sqrt(floor),
        replicates=replicates,
        pulse_count=spec.pulse_count,
        dark_window_count=dark_windows if config.enc_electrons > 0 else 0,
    )


@dataclass(frozen=True, eq=False)
class WindowOptimization:
    """Sweep of the shot-to-electronic crossover against the gate shape."""

    best_window: GatingWindow
    window_durations: np.ndarray
    window_offsets: np.ndarray      # resolved gate starts, seconds
    n_3db: np.ndarray               # same leading axis as window_durations
    reference_photon_number: float


def optimize_window(
    spec: CoherentPulseTrainSpec,
    config: DetectorChainConfig,
    kind: str,
    window_durations: np.ndarray,
    window_offsets: np.ndarray | None = None,
    seed: int | np.random.SeedSequence = 0,
    lead_in: float = DEFAULT_LEAD_IN,
) -> WindowOptimization:
    """Locate the gate duration (and start) minimising the crossover.

    One bright train at ``spec.mean_photon_number`` and one light-free
    train with the same electronic noise realisation are synthesized
    once; every candidate gate is evaluated on this common pair, so the
    whole surface shares its random numbers and the minimum is not an
    artefact of re-rolled noise.  The figure of merit per gate is the
    measured electronic floor divided by the measured per-photon light
    variance; candidates whose light term is not positive come back as
    infinity.
    """
    durations = np.asarray(window_durations, dtype=np.float64)
    if durations.ndim != 1 or durations.size < 1:
        raise ConfigurationError("window_durations must be a 1-d array")
    if np.any(durations <= 0):
        raise ConfigurationError("window durations must be > 0")
    if kind not in ("boxcar", "dcs"):
        raise ConfigurationError(f"unknown window kind {kind!r}")

    ss = seed if isinstance(seed, np.random.SeedSequence) \
        else np.random.SeedSequence(seed)
    s_ph, s_el = ss.spawn(2)
    pulses = sample_pulse_train(spec, s_ph)
    lit = synthesize_trace(pulses, spec, config, s_el, lead_in=lead_in)
    dark_spec = dataclasses.replace(spec, mean_photon_number=0.0)
    dark_pulses = sample_pulse_train(dark_spec, s_ph)
    dark = synthesize_trace(dark_pulses, dark_spec, config, s_el, lead_in=lead_in)

    grid_offsets = window_offsets is not None
    if grid_offsets:
        offsets = np.asarray(window_offsets, dtype=np.float64)
        surface = np.full((durations.size, offsets.size), np.inf)
        resolved = np.empty((durations.size, offsets.size))
    else:
        surface = np.full(durations.size, np.inf)
        resolved = np.empty(durations.size)

    detected = spec.detection_efficiency * spec.mean_photon_number

    def figure(duration: float, start: float) -> float:
        window = GatingWindow(kind=kind, duration=duration, offset=start)
        try:
            v_lit = pulse_variance(gate_pulse_areas(
                lit, window, spec.repetition_period, spec.pulse_count
            ))
            v_dark = pulse_variance(gate_pulse_areas(
                dark, window, spec.repetition_period, spec.pulse_count
            ))
        except AnalysisError:
            return np.inf
        light = v_lit - v_dark
        if light <= 0 or detected <= 0:
            return np.inf
        return v_dark / (light / spec.mean_photon_number)

    for i, duration in enumerate(durations):
        if grid_offsets:
            for j, rel in enumerate(offsets):
                start = lead_in + rel
                resolved[i, j] = start
                surface[i, j] = figure(duration, start)
        else:
            m = _window_samples(
                GatingWindow(kind=kind, duration=duration),
                config.sample_interval,
            )
            start = lead_in + matched_window_offset(
                config, spec.pulse_duration, m * config.sample_interval
            )
            resolved[i] = start
            surface[i] = figure(duration, start)

    if not np.any(np.isfinite(surface)):
        raise AnalysisError("no candidate window produced a usable light term")
    flat = int(np.argmin(np.where(np.isfinite(surface), surface, np.inf)))
    if grid_offsets:
        bi, bj = np.unravel_index(flat, surface.shape)
        best = GatingWindow(
            kind=kind, duration=float(durations[bi]),
            offset=float(resolved[bi, bj]),
        )
    else:
        best = GatingWindow(
            kind=kind, duration=float(durations[flat]),
            offset=float(resolved[flat]),
        )
    return WindowOptimization(
        best_window=best,
        window_durations=durations,
        window_offsets=resolved,
        n_3db=surface,
        reference_photon_number=spec.mean_photon_number,
    )


@dataclass(frozen=True)
class ClassicalNoiseReport:
    """Outcome of the classical-noise screen on a scaling result."""

    flagged: bool
    quadratic_fraction: float     # quadratic / linear contribution at max N
    significance: float           # quadratic coefficient over its error
    threshold: float


def classical_noise_check(
    result: NoiseScalingResult, threshold: float = 0.1
) -> ClassicalNoiseReport:
    """Screen a scaling result for super-Poissonian (classical) noise.

    Flags when the fitted quadratic term contributes more than
    ``threshold`` of the linear term at the top of the photon-number
    grid and the coefficient is positive with at least two standard
    errors of support.  A shot-noise-limited differential measurement
    keeps the quadratic term consistent with zero.
    """
    if threshold <= 0:
        raise ConfigurationError(f"threshold must be > 0, got {threshold}")
    nb_max = float(np.max(result.photon_numbers))
    linear = result.linear_coeff * nb_max
    quadratic = result.quadratic_coeff * nb_max * nb_max
    fraction = quadratic / linear if linear > 0 else np.inf
    if result.quadratic_se > 0 and np.isfinite(result.quadratic_se):
        significance = result.quadratic_coeff / result.quadratic_se
    else:
        significance = np.nan
    flagged = bool(
        result.quadratic_coeff > 0
        and fraction > threshold
        and (not np.isfinite(significance) or significance > 2.0)
    )
    return ClassicalNoiseReport(
        flagged=flagged,
        quadratic_fraction=float(fraction),
        significance=float(significance),
        threshold=threshold,
    )
