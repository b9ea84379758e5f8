"""Reading and writing traces, spectra and analysis tables.

Traces travel as plain-text files: ``#``-prefixed ``key = value``
header lines followed by one sample per line (or ``time,value`` pairs).
Floats are written with shortest round-trip formatting, so writing a
trace and reading it back reproduces the samples bit for bit and
re-serialising gives byte-identical files — the property the pipeline
manifest relies on.

Parse failures raise :class:`IngestError` naming the offending line.
Traces without calibration metadata still load, but are marked
uncalibrated so downstream outputs keep the source's unit instead of
claiming photoelectrons.
"""

from __future__ import annotations

import os
from typing import Iterable

import numpy as np

from .chain import ChainResponse, Trace
from .errors import IngestError
from .pulses import NoiseScalingResult, PulseAreas, WindowOptimization
from .spectra import SpectrumEstimate

__all__ = [
    "write_trace",
    "read_trace",
    "write_spectrum",
    "read_spectrum",
    "write_areas",
    "write_scaling_table",
    "write_optimization_table",
    "write_response_table",
]

_TRACE_MAGIC = "diffdet-trace v1"
_SPECTRUM_MAGIC = "diffdet-spectrum v1"


def _fmt(x: float) -> str:
    # repr of a float is the shortest string that round-trips exactly.
    return repr(float(x))


def _write_lines(path: str | os.PathLike, lines: Iterable[str]) -> None:
    with open(path, "w", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def write_trace(trace: Trace, path: str | os.PathLike) -> None:
    """Serialise a trace; see the module docstring for the format."""
    lines = [
        f"# {_TRACE_MAGIC}",
        f"# sample_interval = {_fmt(trace.sample_interval)}",
        f"# origin_time = {_fmt(trace.origin_time)}",
        f"# unit = {trace.unit}",
        f"# calibrated = {int(trace.calibrated)}",
        "# columns = value",
    ]
    lines.extend(_fmt(x) for x in trace.samples)
    _write_lines(path, lines)


def _parse_header(line: str, lineno: int) -> tuple[str, str]:
    body = line[1:].strip()
    if "=" not in body:
        raise IngestError(f"line {lineno}: malformed header {line!r}")
    key, _, value = body.partition("=")
    return key.strip(), value.strip()


def read_trace(path: str | os.PathLike) -> Trace:
    """Parse a trace file.

    Accepts the native single-column format and two-column
    ``time,value`` data (header or bare).  Two-column files must be
    uniformly sampled; single-column files must declare
    ``sample_interval``.  Unknown header keys are ignored.
    """
    headers: dict[str, str] = {}
    times: list[float] = []
    values: list[float] = []
    two_column: bool | None = None
    try:
        fh = open(path, "r")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line[1:].strip() == _TRACE_MAGIC:
                    continue
                try:
                    key, value = _parse_header(line, lineno)
                except IngestError:
                    # Tolerate free-form comments that are not key = value.
                    continue
                headers[key] = value
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            if two_column is None:
                two_column = len(parts) == 2
            if len(parts) != (2 if two_column else 1):
                raise IngestError(
                    f"line {lineno}: expected {2 if two_column else 1} "
                    f"column(s), got {len(parts)}"
                )
            try:
                if two_column:
                    times.append(float(parts[0]))
                    values.append(float(parts[1]))
                else:
                    values.append(float(parts[0]))
            except ValueError as exc:
                raise IngestError(f"line {lineno}: {exc}") from exc

    if not values:
        raise IngestError(f"{path}: no samples found")

    origin = float(headers.get("origin_time", "0") or 0.0)
    if two_column:
        t = np.asarray(times)
        if t.size < 2:
            raise IngestError(f"{path}: need at least two samples to infer timing")
        steps = np.diff(t)
        dt = float(np.median(steps))
        if dt <= 0 or np.any(np.abs(steps - dt) > 1e-6 * dt + 1e-15):
            raise IngestError(f"{path}: time column is not uniformly sampled")
        origin = float(t[0])
    else:
        if "sample_interval" not in headers:
            raise IngestError(
                f"{path}: single-column trace lacks a sample_interval header"
            )
        try:
            dt = float(headers["sample_interval"])
        except ValueError as exc:
            raise IngestError(f"{path}: bad sample_interval: {exc}") from exc
        if dt <= 0:
            raise IngestError(f"{path}: sample_interval must be > 0, got {dt}")

    samples = np.asarray(values, dtype=np.float64)
    unit = headers.get("unit", "arb")
    calibrated = headers.get("calibrated", "0").strip() in ("1", "true", "yes")
    if "electrons_per_unit" in headers:
        try:
            scale = float(headers["electrons_per_unit"])
        except ValueError as exc:
            raise IngestError(f"{path}: bad electrons_per_unit: {exc}") from exc
        samples = samples * scale
        unit = "pe"
        calibrated = True
    return Trace(
        samples=samples,
        sample_interval=dt,
        origin_time=origin,
        unit=unit,
        calibrated=calibrated,
    )


def write_spectrum(spectrum: SpectrumEstimate, path: str | os.PathLike) -> None:
    lines = [
        f"# {_SPECTRUM_MAGIC}",
        f"# resolution_bandwidth = {_fmt(spectrum.resolution_bandwidth)}",
        f"# segment_count = {spectrum.segment_count}",
        f"# unit = {spectrum.unit}",
        "# columns = frequency,power_density",
    ]
    lines.extend(
        f"{_fmt(f)},{_fmt(p)}"
        for f, p in zip(spectrum.frequencies, spectrum.power_density)
    )
    _write_lines(path, lines)


def read_spectrum(path: str | os.PathLike) -> SpectrumEstimate:
    headers: dict[str, str] = {}
    freqs: list[float] = []
    dens: list[float] = []
    try:
        fh = open(path, "r")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line[1:].strip() == _SPECTRUM_MAGIC:
                    continue
                try:
                    key, value = _parse_header(line, lineno)
                except IngestError:
                    continue
                headers[key] = value
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            if len(parts) != 2:
                raise IngestError(
                    f"line {lineno}: expected 2 columns, got {len(parts)}"
                )
            try:
                freqs.append(float(parts[0]))
                dens.append(float(parts[1]))
            except ValueError as exc:
                raise IngestError(f"line {lineno}: {exc}") from exc
    if len(freqs) < 2:
        raise IngestError(f"{path}: not enough spectrum points")
    f = np.asarray(freqs)
    rbw = float(headers.get("resolution_bandwidth", f[1] - f[0]))
    return SpectrumEstimate(
        frequencies=f,
        power_density=np.asarray(dens),
        resolution_bandwidth=rbw,
        segment_count=int(headers.get("segment_count", "1")),
        unit=headers.get("unit", "arb"),
    )


def write_areas(areas: PulseAreas, path: str | os.PathLike) -> None:
    lines = [
        "# diffdet-areas v1",
        f"# window_kind = {areas.window.kind}",
        f"# window_duration = {_fmt(areas.window.duration)}",
        f"# window_offset = {_fmt(areas.window.offset)}",
        f"# repetition_period = {_fmt(areas.repetition_period)}",
        f"# unit = {areas.unit}",
        f"# calibrated = {int(areas.calibrated)}",
        "# columns = index,area",
    ]
    lines.extend(f"{i},{_fmt(v)}" for i, v in enumerate(areas.values))
    _write_lines(path, lines)


def write_scaling_table(result: NoiseScalingResult, path: str | os.PathLike) -> None:
    lines = [
        "# diffdet-scaling v1",
        f"# window_kind = {result.window.kind}",
        f"# window_duration = {_fmt(result.window.duration)}",
        f"# electronic_variance = {_fmt(result.electronic_variance)}",
        f"# linear_coeff = {_fmt(result.linear_coeff)}",
        f"# quadratic_coeff = {_fmt(result.quadratic_coeff)}",
        f"# loglog_slope = {_fmt(result.loglog_slope)}",
        f"# n_3db = {_fmt(result.n_3db)}",
        f"# enc = {_fmt(result.enc)}",
        "# columns = photon_number,variance,variance_se",
    ]
    lines.extend(
        f"{_fmt(n)},{_fmt(v)},{_fmt(s)}"
        for n, v, s in zip(
            result.photon_numbers, result.variances, result.variance_ses
        )
    )
    _write_lines(path, lines)


def write_optimization_table(
    opt: WindowOptimization, path: str | os.PathLike
) -> None:
    lines = [
        "# diffdet-window-sweep v1",
        f"# best_kind = {opt.best_window.kind}",
        f"# best_duration = {_fmt(opt.best_window.duration)}",
        f"# best_offset = {_fmt(opt.best_window.offset)}",
        f"# reference_photon_number = {_fmt(opt.reference_photon_number)}",
    ]
    if opt.n_3db.ndim == 1:
        lines.append("# columns = duration,offset,n_3db")
        lines.extend(
            f"{_fmt(d)},{_fmt(o)},{_fmt(v)}"
            for d, o, v in zip(opt.window_durations, opt.window_offsets, opt.n_3db)
        )
    else:
        lines.append("# columns = duration,offset,n_3db")
        for i, d in enumerate(opt.window_durations):
            for j in range(opt.n_3db.shape[1]):
                lines.append(
                    f"{_fmt(d)},{_fmt(opt.window_offsets[i, j])},"
                    f"{_fmt(opt.n_3db[i, j])}"
                )
    _write_lines(path, lines)


def write_response_table(
    response: ChainResponse, path: str | os.PathLike
) -> None:
    lines = [
        "# diffdet-response v1",
        "# columns = frequency,gain_power",
    ]
    lines.extend(
        f"{_fmt(f)},{_fmt(g)}"
        for f, g in zip(response.frequencies, response.gain_power)
    )
    _write_lines(path, lines)
