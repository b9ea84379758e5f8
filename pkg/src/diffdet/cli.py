"""Command line front end.

Subcommands cover the single-step surfaces (simulate, analyze,
spectrum, predict, optimize-window, scaling, ingest-check) plus ``run``
for the full pipeline.  Exit codes: 0 success, 2 configuration error,
3 ingest error, 4 analysis error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from .chain import synthesize_trace
from .errors import (
    EXIT_ANALYSIS,
    EXIT_CONFIG,
    EXIT_INGEST,
    EXIT_OK,
    AnalysisError,
    ConfigurationError,
    IngestError,
)
from .photons import sample_pulse_train
from .pipeline import load_run_config, run_pipeline
from .pulses import (
    classical_noise_check,
    gate_pulse_areas,
    noise_scaling,
    optimize_window,
    pulse_variance,
    resolve_window,
)
from .spectra import estimate_psd, predict_pulsed_noise
from .traceio import (
    read_spectrum,
    read_trace,
    write_areas,
    write_optimization_table,
    write_scaling_table,
    write_spectrum,
    write_trace,
)
from .windows import WINDOW_KINDS, GatingWindow

__all__ = ["main"]


def _float_list(text: str) -> np.ndarray:
    try:
        values = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ConfigurationError(f"bad number list {text!r}: {exc}") from exc
    if values.size == 0:
        raise ConfigurationError(f"empty number list {text!r}")
    return values


def _synthesize_from_config(config):
    ss = np.random.SeedSequence(config.seed)
    s_photon, s_noise = ss.spawn(4)[:2]
    pulses = sample_pulse_train(config.source, s_photon)
    return synthesize_trace(pulses, config.source, config.chain, s_noise)


def _cmd_simulate(args) -> int:
    config = load_run_config(args.config)
    trace = _synthesize_from_config(config)
    write_trace(trace, args.out)
    print(f"wrote {len(trace)} samples ({trace.duration * 1e3:.3f} ms) to {args.out}")
    return EXIT_OK


def _resolved_window(config, args) -> GatingWindow:
    window = config.window
    if args.window_kind is not None:
        window = dataclasses.replace(window, kind=args.window_kind, offset=None)
    if args.window_duration is not None:
        window = dataclasses.replace(
            window, duration=args.window_duration, offset=None
        )
    if args.window_offset is not None:
        window = dataclasses.replace(window, offset=args.window_offset)
    return resolve_window(window, config.source, config.chain)


def _cmd_analyze(args) -> int:
    config = load_run_config(args.config)
    trace = read_trace(args.trace) if args.trace else _synthesize_from_config(config)
    window = _resolved_window(config, args)
    areas = gate_pulse_areas(
        trace, window, config.source.repetition_period, config.source.pulse_count
    )
    if args.out:
        write_areas(areas, args.out)
    mean = float(np.mean(areas.values))
    var = pulse_variance(areas)
    print(
        f"{window.kind} window {window.duration * 1e6:.3f} us at offset "
        f"{window.offset * 1e6:.3f} us: {len(areas)} pulses"
    )
    print(f"mean area     = {mean:.6g} {areas.unit}")
    print(f"area variance = {var:.6g} {areas.unit}^2")
    if not areas.calibrated:
        print("note: trace is uncalibrated; values are in source units")
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    trace = read_trace(args.trace)
    spectrum = estimate_psd(trace, args.segment_length)
    write_spectrum(spectrum, args.out)
    print(
        f"{spectrum.frequencies.size} bins to {spectrum.nyquist * 1e-6:.3f} MHz, "
        f"rbw {spectrum.resolution_bandwidth * 1e-3:.3f} kHz, "
        f"{spectrum.segment_count} segments -> {args.out}"
    )
    return EXIT_OK


def _cmd_predict(args) -> int:
    spectrum = read_spectrum(args.spectrum)
    window = GatingWindow(kind=args.window_kind, duration=args.window_duration)
    predicted = predict_pulsed_noise(spectrum, window)
    print(
        f"predicted {args.window_kind} area variance for "
        f"{args.window_duration * 1e6:.3f} us window: {predicted:.6g} "
        f"{spectrum.unit}^2"
    )
    return EXIT_OK


def _cmd_optimize_window(args) -> int:
    config = load_run_config(args.config)
    durations = _float_list(args.durations) if args.durations else \
        np.array([0.5, 0.8, 1.0, 1.25, 1.5, 2.0, 3.0, 5.0]) * 1e-6
    offsets = _float_list(args.offsets) if args.offsets else None
    opt = optimize_window(
        config.source,
        config.chain,
        args.kind,
        durations,
        window_offsets=offsets,
        seed=np.random.SeedSequence(config.seed).spawn(5)[4],
    )
    if args.out:
        write_optimization_table(opt, args.out)
    best = opt.best_window
    print(
        f"best {best.kind} window: {best.duration * 1e6:.3f} us at offset "
        f"{best.offset * 1e6:.3f} us"
    )
    finite = opt.n_3db[np.isfinite(opt.n_3db)]
    print(f"crossover photon number there: {float(np.min(finite)):.4g}")
    return EXIT_OK


def _cmd_scaling(args) -> int:
    config = load_run_config(args.config)
    if config.photon_number_grid is None:
        raise ConfigurationError(
            "the configuration has no analysis.photon_number_grid"
        )
    result = noise_scaling(
        config.source,
        np.asarray(config.photon_number_grid),
        config.chain,
        config.window,
        np.random.SeedSequence(config.seed).spawn(4)[3],
        replicates=config.replicates,
    )
    if args.out:
        write_scaling_table(result, args.out)
    report = classical_noise_check(result)
    print(f"window          : {result.window.kind} {result.window.duration * 1e6:.3f} us")
    print(f"electronic floor: {result.electronic_variance:.6g} (enc {result.enc:.1f} e)")
    print(f"linear coeff    : {result.linear_coeff:.6g} +- {result.linear_se:.2g}")
    print(f"quadratic coeff : {result.quadratic_coeff:.6g} +- {result.quadratic_se:.2g}")
    print(f"log-log slope   : {result.loglog_slope:.4f}")
    print(f"crossover photon number: {result.n_3db:.6g}")
    print(f"classical noise flagged: {report.flagged}")
    return EXIT_OK


def _cmd_ingest_check(args) -> int:
    trace = read_trace(args.trace)
    print(f"samples        : {len(trace)}")
    print(f"sample_interval: {trace.sample_interval:g} s")
    print(f"duration       : {trace.duration:g} s")
    print(f"origin_time    : {trace.origin_time:g} s")
    print(f"unit           : {trace.unit}")
    print(f"calibrated     : {trace.calibrated}")
    return EXIT_OK


def _cmd_run(args) -> int:
    config = load_run_config(args.config)
    manifest = run_pipeline(config, args.out_dir)
    print(f"wrote {len(manifest['outputs'])} outputs to {args.out_dir}")
    for name in sorted(manifest["outputs"]):
        print(f"  {name}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffdet",
        description=(
            "Simulation and noise analysis of differential AC-coupled "
            "charge-integrating photodetectors."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize a pulsed trace")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", required=True, help="output trace file")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="gate a trace into per-pulse areas")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--trace", help="trace file; omitted means simulate first")
    p.add_argument("--window-kind", choices=WINDOW_KINDS)
    p.add_argument("--window-duration", type=float, help="seconds")
    p.add_argument("--window-offset", type=float, help="seconds from trace origin")
    p.add_argument("--out", help="write the per-pulse areas here")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("spectrum", help="estimate the PSD of a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--segment-length", type=int, default=4096)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser(
        "predict", help="predict gated noise from a measured spectrum"
    )
    p.add_argument("--spectrum", required=True)
    p.add_argument("--window-kind", choices=WINDOW_KINDS, default="boxcar")
    p.add_argument("--window-duration", type=float, required=True, help="seconds")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser(
        "optimize-window", help="sweep gate durations for the best crossover"
    )
    p.add_argument("--config", required=True)
    p.add_argument("--kind", choices=WINDOW_KINDS, default="boxcar")
    p.add_argument("--durations", help="comma-separated seconds")
    p.add_argument("--offsets", help="comma-separated seconds after each pulse")
    p.add_argument("--out", help="write the sweep table here")
    p.set_defaults(func=_cmd_optimize_window)

    p = sub.add_parser("scaling", help="variance vs photon number study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="write the scaling table here")
    p.set_defaults(func=_cmd_scaling)

    p = sub.add_parser("ingest-check", help="validate a trace file")
    p.add_argument("--trace", required=True)
    p.set_defaults(func=_cmd_ingest_check)

    p = sub.add_parser("run", help="full pipeline into an output directory")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IngestError as exc:
        print(f"ingest error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
