"""Spectral estimation, transfer recovery, transform-domain prediction."""

import numpy as np
import pytest

from diffdet import (
    AnalysisError,
    ConfigurationError,
    GatingWindow,
    SpectrumEstimate,
    band_edge_frequency,
    chain_transfer_power,
    estimate_psd,
    extract_transimpedance,
    predict_pulsed_noise,
    signal_to_electronic_ratio,
    synthesize_cw_trace,
    version_i,
)
from diffdet.chain import Trace


def white_trace(var, n, seed=0, dt=1e-8):
    rng = np.random.default_rng(seed)
    return Trace(samples=rng.normal(0.0, np.sqrt(var), n), sample_interval=dt)


def flat_spectrum(density, f_max, n=20_001, unit="pe"):
    f = np.linspace(0.0, f_max, n)
    return SpectrumEstimate(
        frequencies=f,
        power_density=np.full_like(f, density),
        resolution_bandwidth=f[1],
        segment_count=1,
        unit=unit,
    )


class TestEstimatePsd:
    def test_white_noise_density_and_parseval(self):
        var, dt = 2.5, 1e-8
        tr = white_trace(var, 1 << 21, seed=1, dt=dt)
        spec = estimate_psd(tr, 4096)
        # One-sided density of white noise of per-sample variance v.
        assert spec.power_density[1:].mean() == pytest.approx(
            2 * var * dt, rel=0.01
        )
        assert spec.band_power() == pytest.approx(var, rel=0.02)
        assert spec.resolution_bandwidth == pytest.approx(1 / (4096 * dt))

    def test_segment_length_must_be_power_of_two(self):
        tr = white_trace(1.0, 10_000)
        with pytest.raises(ConfigurationError):
            estimate_psd(tr, 1000)

    def test_trace_must_hold_two_segments(self):
        tr = white_trace(1.0, 5000)
        with pytest.raises(AnalysisError):
            estimate_psd(tr, 4096)

    def test_mean_removal_zeroes_dc_bin(self):
        tr = Trace(samples=np.full(1 << 14, 7.0), sample_interval=1e-8)
        spec = estimate_psd(tr, 1024)
        assert spec.power_density[0] == pytest.approx(0.0, abs=1e-20)


class TestBandEdge:
    def test_interpolated_crossing(self):
        f = np.array([0.0, 1.0, 2.0, 3.0])
        p = np.array([1.0, 1.0, 0.6, 0.4])
        assert band_edge_frequency(f, p) == pytest.approx(2.5)

    def test_never_reaching_level_raises(self):
        with pytest.raises(AnalysisError):
            band_edge_frequency(np.array([0.0, 1.0]), np.array([0.0, 0.0]))


class TestTransimpedance:
    def test_exact_algebra_and_clamp(self):
        f = np.linspace(0, 1e6, 101)
        dark = flat_spectrum(1.0, 1e6, 101)
        lit = SpectrumEstimate(
            frequencies=f,
            power_density=1.0 + 4.0 * np.exp(-f / 2e5),
            resolution_bandwidth=f[1],
            segment_count=1,
        )
        resp = extract_transimpedance(lit, dark, drive_density=2.0)
        np.testing.assert_allclose(
            resp.gain_power, 2.0 * np.exp(-f / 2e5), rtol=1e-12
        )
        # Negative excursions clamp to zero.
        noisy = SpectrumEstimate(
            frequencies=f,
            power_density=np.full_like(f, 0.5),
            resolution_bandwidth=f[1],
            segment_count=1,
        )
        resp = extract_transimpedance(noisy, dark, drive_density=2.0)
        assert np.all(resp.gain_power == 0.0)

    def test_grid_mismatch_raises(self):
        a = flat_spectrum(1.0, 1e6, 101)
        b = flat_spectrum(1.0, 2e6, 101)
        with pytest.raises(AnalysisError):
            extract_transimpedance(a, b, 1.0)
        with pytest.raises(ConfigurationError):
            extract_transimpedance(a, a, 0.0)

    def test_recovers_chain_bandwidth_from_cw_run(self):
        # Continuous illumination drives the chain with a white
        # photoelectron stream of known density; the lit-minus-dark
        # spectrum over that density must reproduce the chain's transfer
        # power, including its upper band edge, within one bin.
        cfg = version_i()
        flux, dt, n = 2e12, cfg.sample_interval, 1 << 22
        lit = synthesize_cw_trace(flux, n * dt, cfg, 5)
        dark = synthesize_cw_trace(0.0, n * dt, cfg, 6)
        spec_lit = estimate_psd(lit, 4096)
        spec_dark = estimate_psd(dark, 4096)
        drive = 2.0 * 0.9 * flux * dt * dt  # one-sided e^2/Hz of the stream
        resp = extract_transimpedance(spec_lit, spec_dark, drive)

        kernel = np.ones(5) / 5
        smooth = np.convolve(resp.gain_power, kernel, mode="same")
        ref = chain_transfer_power(cfg, resp.frequencies)

        edge_meas = band_edge_frequency(resp.frequencies, smooth)
        edge_ref = band_edge_frequency(ref.frequencies, ref.gain_power)
        assert abs(edge_meas - edge_ref) <= spec_lit.resolution_bandwidth

        # In-band shape agreement (away from the noisy clamped region).
        band = resp.frequencies < 3e5
        ratio = smooth[band][1:] / ref.gain_power[band][1:]
        assert np.median(ratio) == pytest.approx(1.0, rel=0.05)

    def test_doubling_flux_doubles_excess_density(self):
        cfg = version_i()
        dt, n = cfg.sample_interval, 1 << 21
        dark = estimate_psd(synthesize_cw_trace(0.0, n * dt, cfg, 7), 4096)
        one = estimate_psd(synthesize_cw_trace(1e12, n * dt, cfg, 8), 4096)
        two = estimate_psd(synthesize_cw_trace(2e12, n * dt, cfg, 9), 4096)
        band = (one.frequencies > 2e4) & (one.frequencies < 2.5e5)
        excess_one = (one.power_density - dark.power_density)[band].mean()
        excess_two = (two.power_density - dark.power_density)[band].mean()
        assert excess_two / excess_one == pytest.approx(2.0, rel=0.05)


class TestSignalToElectronicRatio:
    def test_known_ratio_and_nan_flags(self):
        f = np.linspace(0, 1e6, 11)
        dark = SpectrumEstimate(
            frequencies=f,
            power_density=np.concatenate([[0.0], np.ones(10)]),
            resolution_bandwidth=f[1],
            segment_count=1,
        )
        lit = SpectrumEstimate(
            frequencies=f,
            power_density=np.full_like(f, 4.0),
            resolution_bandwidth=f[1],
            segment_count=1,
        )
        ratio = signal_to_electronic_ratio(lit, dark)
        assert np.isnan(ratio[0])  # dark bin holds no reference
        np.testing.assert_allclose(ratio[1:], 10 * np.log10(4.0), rtol=1e-12)


class TestPredictPulsedNoise:
    def test_white_noise_laws(self):
        # Gating white noise of per-sample variance v with a boxcar of m
        # samples leaves v*dt/sigma; the dcs window doubles it.  The
        # transform-domain prediction from the measured density must
        # land on the same numbers.
        var, dt = 3.0, 1e-8
        tr = white_trace(var, 1 << 21, seed=3, dt=dt)
        spec = estimate_psd(tr, 4096)
        sigma = 1.25e-6
        box = predict_pulsed_noise(spec, GatingWindow("boxcar", sigma))
        dcs = predict_pulsed_noise(spec, GatingWindow("dcs", sigma))
        assert box == pytest.approx(var * dt / sigma, rel=0.03)
        assert dcs == pytest.approx(2 * var * dt / sigma, rel=0.03)

    def test_band_coverage_enforced(self):
        spec = flat_spectrum(1.0, 50e6)
        with pytest.raises(AnalysisError):
            predict_pulsed_noise(spec, GatingWindow("boxcar", 50e-9))
        # A wide window decays well inside the band: fine.
        predict_pulsed_noise(spec, GatingWindow("boxcar", 1.25e-6))

    def test_dc_bin_patch_matters_only_for_boxcar(self):
        # Zeroing the DC bin (as mean removal does) must not dent the
        # boxcar prediction: the patch substitutes the neighbour bin.
        density, sigma = 2.0, 1.25e-6
        spec = flat_spectrum(density, 20e6, 8001)
        dented = SpectrumEstimate(
            frequencies=spec.frequencies,
            power_density=np.concatenate([[0.0], spec.power_density[1:]]),
            resolution_bandwidth=spec.resolution_bandwidth,
            segment_count=1,
        )
        full = predict_pulsed_noise(spec, GatingWindow("boxcar", sigma))
        patched = predict_pulsed_noise(dented, GatingWindow("boxcar", sigma))
        assert patched == pytest.approx(full, rel=1e-6)
