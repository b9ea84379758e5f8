"""Electronics chain: widths, calibration, AC behaviour, determinism."""

import numpy as np
import pytest

from diffdet import (
    CoherentPulseTrainSpec,
    ConfigurationError,
    DetectorChainConfig,
    GatingWindow,
    chain_transfer_power,
    impulse_response,
    integrate_boxcar,
    matched_window_offset,
    quantize_trace,
    sample_pulse_train,
    synthesize_cw_trace,
    synthesize_trace,
    version_i,
    version_ii,
)
from diffdet.chain import Trace, shaper_width_coefficient


def fwhm_seconds(trace):
    """Full width at half maximum with linear edge interpolation."""
    y = trace.samples
    half = np.max(y) / 2
    above = np.nonzero(y >= half)[0]
    i, j = above[0], above[-1]
    left = i - (y[i] - half) / (y[i] - y[i - 1]) if i > 0 else i
    right = j + (y[j] - half) / (y[j] - y[j + 1]) if j + 1 < y.size else j
    return (right - left) * trace.sample_interval


def make_spec(**kw):
    base = dict(
        mean_photon_number=1e6,
        pulse_duration=1e-6,
        repetition_period=10e-6,
        pulse_count=20,
        detection_efficiency=0.9,
    )
    base.update(kw)
    return CoherentPulseTrainSpec(**base)


class TestValidation:
    def test_positive_times(self):
        with pytest.raises(ConfigurationError):
            version_i(shaping_time=0.0)
        with pytest.raises(ConfigurationError):
            version_i(sample_interval=-1e-9)

    def test_order_and_residual_bounds(self):
        with pytest.raises(ConfigurationError):
            version_i(shaper_order=0)
        with pytest.raises(ConfigurationError):
            version_i(pole_zero_residual=1.0)
        with pytest.raises(ConfigurationError):
            version_i(pole_zero_residual=-0.1)

    def test_bandwidth_within_nyquist(self):
        with pytest.raises(ConfigurationError):
            version_i(analog_bandwidth=60e6)  # Nyquist is 50 MHz at 10 ns

    def test_discharge_vs_shaping(self):
        with pytest.raises(ConfigurationError):
            version_i(integrator_discharge=1e-6)

    def test_discharge_vs_pulse_duration(self):
        spec = make_spec(pulse_duration=8e-6, repetition_period=100e-6)
        cfg = version_i(integrator_discharge=50e-6)
        pulses = sample_pulse_train(spec, 0)
        with pytest.raises(ConfigurationError):
            synthesize_trace(pulses, spec, cfg, 1)

    def test_presets(self):
        v1, v2 = version_i(), version_ii()
        assert (v1.shaping_time, v1.shaper_order, v1.enc_electrons) == (
            330e-9, 3, 280.0
        )
        assert (v2.shaping_time, v2.shaper_order, v2.enc_electrons) == (
            250e-9, 1, 340.0
        )
        assert version_i(pole_zero_residual=0.05).pole_zero_residual == 0.05


class TestShaperWidth:
    def test_width_coefficients_against_numeric_scan(self):
        # Independent oracle: locate the half-maximum crossings of
        # x**n exp(-x) on a dense grid with linear interpolation.
        for order in (1, 2, 3, 4):
            x = np.linspace(1e-9, 30.0, 3_000_001)
            y = x**order * np.exp(-x)
            half = y.max() / 2
            above = np.nonzero(y >= half)[0]
            i, j = above[0], above[-1]
            xl = np.interp(half, [y[i - 1], y[i]], [x[i - 1], x[i]])
            xr = np.interp(half, [y[j + 1], y[j]], [x[j + 1], x[j]])
            assert shaper_width_coefficient(order) == pytest.approx(
                xr - xl, rel=1e-6
            )

    def test_delta_width_is_nameplate_for_any_order(self):
        # Fine sampling so discretisation does not blur the width.
        for order in (1, 3):
            cfg = version_i(shaper_order=order, sample_interval=1e-9,
                            analog_bandwidth=20e6)
            tr = impulse_response(cfg, 10e-6)
            assert fwhm_seconds(tr) == pytest.approx(2.4 * 330e-9, rel=0.015)


class TestCalibrationAndLinearity:
    def test_isolated_pulse_is_captured_exactly(self):
        spec = make_spec(pulse_count=1, mean_photon_number=1e6, imbalance=1.0)
        cfg = version_i(enc_electrons=0.0)
        charge = 1e6 * 0.9
        pulses = sample_pulse_train(spec, 3)
        # Replace the random draw with a deterministic unit charge.
        pulses = [p.__class__(index=0, differential_electrons=charge,
                              total_electrons=charge) for p in pulses]
        trace = synthesize_trace(pulses, spec, cfg, 0)
        window = GatingWindow(
            "boxcar",
            cfg.reference_window(spec.pulse_duration),
            offset=5e-6 + matched_window_offset(cfg, spec.pulse_duration),
        )
        areas = integrate_boxcar(trace, window, spec.repetition_period, 1)
        assert areas.values[0] == pytest.approx(charge, rel=1e-9)

    def test_trace_is_linear_in_charge(self):
        spec = make_spec(pulse_count=5)
        cfg = version_i(enc_electrons=0.0)
        pulses = sample_pulse_train(spec, 11)
        doubled = [p.__class__(index=p.index,
                               differential_electrons=2 * p.differential_electrons,
                               total_electrons=2 * p.total_electrons)
                   for p in pulses]
        t1 = synthesize_trace(pulses, spec, cfg, 0)
        t2 = synthesize_trace(doubled, spec, cfg, 0)
        np.testing.assert_allclose(t2.samples, 2 * t1.samples, atol=1e-9)

    def test_matched_offset_is_physical(self):
        cfg = version_i()
        off = matched_window_offset(cfg, 1e-6)
        assert 0.0 < off < 2e-6


class TestTransferPower:
    def test_dc_gain_is_exactly_zero(self):
        resp = chain_transfer_power(version_i(), np.array([0.0, 1e3]))
        assert resp.gain_power[0] == 0.0
        assert resp.gain_power[1] > 0.0

    def test_matches_fft_of_impulse_response(self):
        # The transform-domain contract: the reported transfer power and
        # the FFT of a filtered delta agree on the acquisition band.
        cfg = version_i()
        tr = impulse_response(cfg, 400e-6)  # several discharge times
        spec_fft = np.abs(np.fft.rfft(tr.samples)) ** 2
        freqs = np.fft.rfftfreq(len(tr), cfg.sample_interval)
        band = freqs <= 10e6
        resp = chain_transfer_power(cfg, freqs[band])
        ref = resp.gain_power
        fft = spec_fft[band]
        mask = ref > 1e-6 * ref.max()
        assert np.max(np.abs(fft[mask] - ref[mask]) / ref[mask]) < 0.01

    def test_high_frequency_rolloff(self):
        resp = chain_transfer_power(version_i(), np.array([2e6, 4e6]))
        drop_db = 10 * np.log10(resp.gain_power[0] / resp.gain_power[1])
        assert drop_db > 12.0

    def test_frequencies_validated(self):
        with pytest.raises(ConfigurationError):
            chain_transfer_power(version_i(), np.array([-1.0]))
        with pytest.raises(ConfigurationError):
            chain_transfer_power(version_i(), np.array([60e6]))


class TestACBehaviour:
    def test_perfect_compensation_has_zero_net_area(self):
        tr = impulse_response(version_i(), 500e-6)
        cum = np.cumsum(tr.samples)
        assert abs(cum[-1]) < 1e-3 * np.max(np.abs(cum))

    def test_residual_adds_positive_slow_component(self):
        # Imperfect compensation partially refills the AC-coupling
        # undershoot: the response sits above the perfectly compensated
        # one by a residual that persists on the discharge timescale.
        ideal = impulse_response(version_i(), 60e-6)
        leaky = impulse_response(version_i(pole_zero_residual=0.1), 60e-6)
        dt = ideal.sample_interval
        i1, i2 = int(5e-6 / dt), int(15e-6 / dt)
        extra = leaky.samples - ideal.samples
        assert extra[i1] > 0 and extra[i2] > 0
        # Slow: still a large fraction of itself ten microseconds on,
        # long after the shaper transient has died.
        assert extra[i2] > 0.3 * extra[i1]
        # Both tails remain below baseline: the undershoot dominates.
        assert leaky.samples[i1] < 0 and ideal.samples[i1] < 0
        assert leaky.samples[i1] > ideal.samples[i1]

    def test_pileup_scales_with_photon_number(self):
        # With imperfect compensation an imbalanced train piles up tails
        # between pulses; doubling the light doubles the residual level.
        def gap_level(nbar):
            spec = make_spec(mean_photon_number=nbar, imbalance=0.3,
                             pulse_count=50)
            cfg = version_i(pole_zero_residual=0.05, enc_electrons=0.0)
            trace = synthesize_trace(sample_pulse_train(spec, 21), spec, cfg, 0)
            # Sample the quiet region just before the final pulse.
            t0 = 5e-6 + 49 * spec.repetition_period - 2e-6
            i0 = int(t0 / cfg.sample_interval)
            return trace.samples[i0:i0 + 100].mean()

        lo, hi = gap_level(1e6), gap_level(2e6)
        assert hi / lo == pytest.approx(2.0, rel=0.02)

    def test_balanced_train_has_no_systematic_gap_level(self):
        spec = make_spec(mean_photon_number=1e6, imbalance=0.0, pulse_count=50)
        cfg = version_i(pole_zero_residual=0.05, enc_electrons=0.0)
        trace = synthesize_trace(sample_pulse_train(spec, 22), spec, cfg, 0)
        t0 = 5e-6 + 49 * spec.repetition_period - 2e-6
        i0 = int(t0 / cfg.sample_interval)
        gap = trace.samples[i0:i0 + 100].mean()
        # Shot fluctuations leave only an O(sqrt(N)) residue here.
        assert abs(gap) < 0.05 * 1e6


class TestSynthesis:
    def test_same_seeds_reproduce_bitwise(self):
        spec = make_spec()
        cfg = version_i()
        pulses = sample_pulse_train(spec, 1)
        a = synthesize_trace(pulses, spec, cfg, 2)
        b = synthesize_trace(pulses, spec, cfg, 2)
        assert np.array_equal(a.samples, b.samples)

    def test_noise_seed_changes_trace(self):
        spec = make_spec()
        cfg = version_i()
        pulses = sample_pulse_train(spec, 1)
        a = synthesize_trace(pulses, spec, cfg, 2)
        b = synthesize_trace(pulses, spec, cfg, 3)
        assert not np.array_equal(a.samples, b.samples)

    def test_electronic_noise_level_in_reference_window(self):
        # Gate a light-free trace with the reference boxcar: the rms
        # must come back as the configured ENC.
        spec = make_spec(mean_photon_number=0.0, pulse_count=200,
                         repetition_period=2e-6, pulse_duration=0.5e-6)
        cfg = version_i()
        trace = synthesize_trace(sample_pulse_train(spec, 0), spec, cfg, 9)
        window = GatingWindow("boxcar", 1.25e-6, offset=5e-6)
        areas = integrate_boxcar(trace, window, 2e-6, 200)
        enc = np.std(areas.values)
        assert enc == pytest.approx(280.0, rel=0.12)

    def test_cw_trace_is_centered_and_long(self):
        cfg = version_i()
        tr = synthesize_cw_trace(1e12, 5e-3, cfg, 4)
        assert len(tr) == 500_000
        assert abs(tr.samples.mean()) < 5 * tr.samples.std() / np.sqrt(len(tr)) * 50

    def test_cw_validation(self):
        cfg = version_i()
        with pytest.raises(ConfigurationError):
            synthesize_cw_trace(-1.0, 1e-3, cfg, 0)
        with pytest.raises(ConfigurationError):
            synthesize_cw_trace(1e12, 1e-9, cfg, 0)


class TestQuantizer:
    def test_quantize_levels_and_error(self):
        rng = np.random.default_rng(0)
        tr = Trace(samples=rng.normal(0, 1.0, 10_000), sample_interval=1e-8)
        q = quantize_trace(tr, bits=8, full_scale=4.0)
        step = 4.0 / 128
        assert np.unique(q.samples).size <= 256
        inside = np.abs(tr.samples) < 4.0 - step
        assert np.max(np.abs(q.samples[inside] - tr.samples[inside])) <= step / 2

    def test_quantize_clips(self):
        tr = Trace(samples=np.array([10.0, -10.0]), sample_interval=1e-8)
        q = quantize_trace(tr, bits=4, full_scale=1.0)
        assert q.samples[0] <= 1.0 and q.samples[1] >= -1.0

    def test_quantize_validation(self):
        tr = Trace(samples=np.zeros(4), sample_interval=1e-8)
        with pytest.raises(ConfigurationError):
            quantize_trace(tr, bits=0)
        with pytest.raises(ConfigurationError):
            quantize_trace(tr, bits=8)  # all-zero trace has no scale
