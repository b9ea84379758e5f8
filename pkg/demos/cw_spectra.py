"""Spectra under continuous illumination: shot noise as a flat excess.

A continuously lit balanced pair adds white shot noise on top of the
electronic noise, both shaped by the same chain response.  Dividing the
excess by the known white drive recovers the chain's power transfer,
and the ratio of lit to dark densities shows the in-band margin in dB.

Run:  python3 demos/cw_spectra.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import diffdet as dd

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

cfg = dd.version_i()
flux = 2e12                      # photons per second, split across the pair
duration = (1 << 21) * cfg.sample_interval
efficiency = 0.9

lit = dd.synthesize_cw_trace(flux, duration, cfg, seed=21,
                             detection_efficiency=efficiency)
dark = dd.synthesize_cw_trace(0.0, duration, cfg, seed=22,
                              detection_efficiency=efficiency)

spec_lit = dd.estimate_psd(lit, 8192)
spec_dark = dd.estimate_psd(dark, 8192)

# One-sided density of the detected differential stream, e^2/Hz.
drive = 2 * efficiency * flux * cfg.sample_interval**2
response = dd.extract_transimpedance(spec_lit, spec_dark, drive)
margin = dd.signal_to_electronic_ratio(spec_lit, spec_dark)

edge = dd.band_edge_frequency(response.frequencies, response.gain_power)
print(f"-3 dB edge of recovered transfer: {edge / 1e3:.0f} kHz")
print(f"peak lit/dark margin            : {np.nanmax(margin):.1f} dB")

fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.4), sharex=True)
f_khz = spec_lit.frequencies / 1e3
ax1.semilogy(f_khz, spec_lit.power_density, lw=0.8, label="lit")
ax1.semilogy(f_khz, spec_dark.power_density, lw=0.8, label="dark")
ax1.set_ylabel("density (e$^2$/Hz)")
ax1.set_title("Output spectra under continuous light")
ax1.legend()

model = dd.chain_transfer_power(cfg, response.frequencies).gain_power
ax2.semilogy(f_khz, response.gain_power + 1e-12, lw=0.8,
             label="(lit - dark) / drive")
ax2.semilogy(f_khz, model, "--", lw=1.2, label="chain model")
ax2.axvline(edge / 1e3, ls=":", color="tab:red",
            label=f"-3 dB at {edge / 1e3:.0f} kHz")
ax2.set_xlabel("frequency (kHz)")
ax2.set_ylabel("power transfer")
ax2.set_xlim(0, 4000)
ax2.set_ylim(1e-6, 3)
ax2.legend()
fig.tight_layout()
fig.savefig(OUT / "cw_spectra.png", dpi=130)
print(f"wrote {OUT / 'cw_spectra.png'}")
