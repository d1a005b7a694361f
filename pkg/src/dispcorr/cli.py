"""dispcorr command line: generate, distort, correct, resample, sweep and time."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, bench, doppler
from .doppler import ResampleStrategy, SincLut
from .ionosphere import TECU, IonosphereModel, apply_ionosphere, correct_ionosphere
from .waveform import LfmParams, generate_lfm, read_signal, sidecar_path, write_signal


class CliError(Exception):
    """Raised for problems found while validating arguments or paths."""


def _tec(args) -> IonosphereModel:
    return IonosphereModel(args.tec * TECU if args.tec_units == "tecu" else args.tec)


def _velocity(value: float, units: str) -> float:
    return value * 1e3 if units == "kmps" else value


def _lfm(args) -> LfmParams:
    return LfmParams(args.f0, args.bandwidth, args.pulse_width)


def _check_outputs(args, *paths) -> None:
    """Refuse to overwrite without --force; also reject missing parent dirs."""
    for p in paths:
        if p is None:
            continue
        p = Path(p)
        if not p.parent.exists():
            raise CliError(f"output directory {p.parent} does not exist")
        if p.exists() and not args.force:
            raise CliError(f"{p} exists; pass --force to overwrite")


def _signal_outputs(path) -> tuple:
    return (path, sidecar_path(path))


def _check_inputs(*paths) -> None:
    for p in paths:
        if not Path(p).exists():
            raise CliError(f"input {p} not found")
        if not sidecar_path(p).exists():
            raise CliError(f"input {p} has no sidecar {sidecar_path(p)}")


def _apply_threads(args) -> None:
    if getattr(args, "threads", None) is not None:
        import numba

        if args.threads < 1:
            raise CliError("--threads must be >= 1")
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))


def cmd_gen(args) -> dict:
    params = _lfm(args)
    _check_outputs(args, *_signal_outputs(args.output))
    signal = generate_lfm(params, args.fs, args.carrier)
    if args.record_length is not None:
        signal = analysis.embed(signal, args.record_length)
    write_signal(args.output, signal)
    return {"samples": len(signal), "output": str(args.output)}


def _iono_cmd(args, fn) -> dict:
    model = _tec(args)
    _check_inputs(args.input)
    _check_outputs(args, *_signal_outputs(args.output))
    signal = read_signal(args.input)
    out = fn(signal, model, args.passes, args.floor_db)
    write_signal(args.output, out)
    return {"samples": len(out), "output": str(args.output), "k2": model.k2}


def cmd_distort(args) -> dict:
    return _iono_cmd(args, apply_ionosphere)


def cmd_correct(args) -> dict:
    return _iono_cmd(args, correct_ionosphere)


def _strategy(args, method=None) -> tuple[ResampleStrategy, SincLut | None]:
    strategy = ResampleStrategy(method or args.method, args.execution, args.window)
    lut = SincLut.for_window(args.window, args.lut_density) if strategy.uses_lut else None
    return strategy, lut


def cmd_resample(args) -> dict:
    velocity = _velocity(args.velocity, args.velocity_units)
    alpha = doppler.alpha_from_velocity(velocity)
    if args.invert:
        alpha = 1.0 / alpha
    strategy, lut = _strategy(args)
    if strategy.method == "analytic_lfm":
        raise CliError("analytic_lfm regenerates a chirp from parameters and cannot resample a file")
    _check_inputs(args.input)
    _check_outputs(args, *_signal_outputs(args.output))
    signal = read_signal(args.input)
    center = args.center_frequency
    if center is None and strategy.method in ("fft_pq_with_tone", "frequency_conversion"):
        if signal.carrier_frequency == 0:
            raise CliError(f"{strategy.method} needs --center-frequency for records without a carrier")
        center = signal.carrier_frequency
    out = doppler.resample(signal, alpha, strategy, lut, center, args.threads)
    write_signal(args.output, out)
    return {"samples": len(out), "alpha": alpha, "output": str(args.output)}


def cmd_sweep_doppler(args) -> dict:
    params = _lfm(args)
    if args.points < 1:
        raise CliError("--points must be >= 1")
    vmin = _velocity(args.vmin, args.velocity_units)
    vmax = _velocity(args.vmax, args.velocity_units)
    if vmax < vmin:
        raise CliError("--vmax must be >= --vmin")
    methods = [_strategy(args, m)[0] for m in args.methods]
    _check_outputs(args, args.output)
    velocities = list(np.linspace(vmin, vmax, args.points))
    if args.include_critical:
        n = params.n_samples(args.fs)
        velocities += [v for _, v in analysis.critical_velocities(n, vmax) if v >= vmin]
        velocities = sorted(set(velocities))
    rows = analysis.doppler_loss_sweep(
        params, args.fs, velocities, methods, args.carrier, args.lut_density, args.threads
    )
    analysis.write_sweep_csv(args.output, rows)
    return {"rows": len(rows), "output": str(args.output)}


def cmd_sweep_chebyshev(args) -> dict:
    params = _lfm(args)
    model = _tec(args)
    if args.points < 2:
        raise CliError("--points must be >= 2")
    _check_outputs(args, args.output)
    table = analysis.chebyshev_residual_sweep(params, model, np.linspace(0, params.pulse_width, args.points))
    table.write_csv(args.output)
    return {
        "max_residual_corrected_hz": float(table.corrected.max()),
        "max_residual_original_hz": float(table.original.max()),
        "output": str(args.output),
    }


def cmd_compare_iono(args) -> dict:
    params = _lfm(args)
    model = _tec(args)
    _check_outputs(args, args.output)
    result = analysis.compare_ionosphere(params, model, args.fs, args.record_length, args.passes)
    result.write_csv(args.output, args.span)
    return {
        "loss_db": result.losses,
        "round_trip_db": result.round_trip,
        "cubic_received_db": result.cubic_received,
        "output": str(args.output),
    }


def cmd_compress(args) -> dict:
    _check_inputs(args.input, args.reference)
    _check_outputs(args, args.output)
    received = read_signal(args.input)
    reference = read_signal(args.reference)
    peak_ref = analysis.autocorrelation_peak(reference)
    result = analysis.matched_filter(received, reference, peak_ref)
    if args.output is not None:
        db = result.magnitude_db(peak_ref)
        lags = np.arange(db.size) + result.lag_offset
        np.savetxt(args.output, np.column_stack((lags, db)), delimiter=",", header="lag,magnitude_db", comments="", fmt=["%d", "%.6f"])
    return {
        "peak_lag": result.peak_lag,
        "interpolated_lag": result.interpolated_lag,
        "peak_magnitude": result.peak_magnitude,
        "snr_loss_db": result.snr_loss_db,
    }


def cmd_bench(args) -> dict:
    config = bench.BenchConfig(
        operation=args.operation,
        n_samples=args.n_samples,
        sample_rate=args.fs,
        velocity=_velocity(args.velocity, args.velocity_units),
        execution=args.execution,
        window_size=args.window,
        lut_density=args.lut_density,
        workers=args.threads,
    )
    if config.operation == "sinc_windowed":
        ResampleStrategy("sinc_windowed", config.execution, config.window_size)
    _check_outputs(args, args.output, args.summary)
    report = bench.time_operation(bench.make_operation(config), args.trials, args.warmup, config.n_samples)
    report.write_csv(args.output)
    if args.summary is not None:
        report.write_summary(args.summary)
    return report.summary()


def _add_lfm(p, f0=413e6, bandwidth=18e6, pulse_width=100e-6, fs=2.048e9):
    p.add_argument("--f0", type=float, default=f0, help="start frequency, Hz")
    p.add_argument("--bandwidth", type=float, default=bandwidth, help="sweep bandwidth, Hz")
    p.add_argument("--pulse-width", type=float, default=pulse_width, help="pulse width, s")
    p.add_argument("--fs", type=float, default=fs, help="sample rate, Hz")


def _add_tec(p):
    p.add_argument("--tec", type=float, required=True, help="total electron content")
    p.add_argument("--tec-units", choices=("si", "tecu"), default="si", help="si = el/m^2, tecu = 1e16 el/m^2")


def _add_resampler(p, methods=True):
    if methods:
        p.add_argument("--method", choices=doppler.METHODS, default="sinc_windowed")
    p.add_argument("--execution", choices=doppler.EXECUTIONS, default="serial")
    p.add_argument("--window", type=int, default=25, help="sinc window size in samples (odd)")
    p.add_argument("--lut-density", type=int, default=100, help="sinc table values per sample")


def _add_velocity_units(p):
    p.add_argument("--velocity-units", choices=("mps", "kmps"), default="mps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dispcorr", description=__doc__)
    parser.add_argument("--threads", type=int, default=None, help="cap on internal worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--force", action="store_true", help="overwrite existing outputs")

    p = sub.add_parser("gen", parents=[common], help="write an LFM pulse")
    _add_lfm(p)
    p.add_argument("--carrier", type=float, default=0.0, help="carrier the record is mixed down by, Hz")
    p.add_argument("--record-length", type=int, default=None, help="center the pulse in this many samples")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(func=cmd_gen)

    for name, func, text in (("distort", cmd_distort, "add ionospheric dispersion"), ("correct", cmd_correct, "remove ionospheric dispersion")):
        p = sub.add_parser(name, parents=[common], help=text)
        _add_tec(p)
        p.add_argument("--passes", type=int, choices=(1, 2), default=2)
        p.add_argument("--floor-db", type=float, default=-80.0, help="energy allowed at or below 0 Hz, dB re peak")
        p.add_argument("-i", "--input", type=Path, required=True)
        p.add_argument("-o", "--output", type=Path, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("resample", parents=[common], help="apply s(alpha t) for a range rate")
    p.add_argument("--velocity", type=float, required=True, help="range rate, positive approaching")
    _add_velocity_units(p)
    _add_resampler(p)
    p.add_argument("--invert", action="store_true", help="resample by 1/alpha to undo the dilation")
    p.add_argument("--center-frequency", type=float, default=None, help="absolute band center for tone methods, Hz")
    p.add_argument("-i", "--input", type=Path, required=True)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("sweep-doppler", parents=[common], help="correction loss versus velocity")
    _add_lfm(p, 411e6, 18e6, 500e-6, 200e6)
    p.add_argument("--carrier", type=float, default=None, help="defaults to the band center")
    p.add_argument("--vmin", type=float, default=0.0)
    p.add_argument("--vmax", type=float, default=5000.0)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--include-critical", action="store_true", help="add velocities needing a whole number of samples")
    _add_velocity_units(p)
    p.add_argument("--methods", nargs="+", choices=doppler.METHODS, default=["fft_pq", "sinc_windowed", "frequency_conversion", "linear"])
    _add_resampler(p, methods=False)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(func=cmd_sweep_doppler)

    p = sub.add_parser("sweep-chebyshev", parents=[common], help="polynomial predistortion residuals")
    _add_lfm(p, 390e6, 20e6, 100e-6)
    _add_tec(p)
    p.add_argument("--points", type=int, default=1001)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(func=cmd_sweep_chebyshev)

    p = sub.add_parser("compare-iono", parents=[common], help="LFM, POLY, FFT and CUBIC compressed traces")
    _add_lfm(p)
    _add_tec(p)
    p.add_argument("--passes", type=int, choices=(1, 2), default=2)
    p.add_argument("--record-length", type=int, default=None, help="receive window length in samples")
    p.add_argument("--span", type=int, default=2048, help="lags written either side of each peak")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.set_defaults(func=cmd_compare_iono)

    p = sub.add_parser("compress", parents=[common], help="matched filter a record against a reference")
    p.add_argument("-i", "--input", type=Path, required=True)
    p.add_argument("-r", "--reference", type=Path, required=True)
    p.add_argument("-o", "--output", type=Path, default=None, help="optional CSV of lag,magnitude_db")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("bench", parents=[common], help="time one operation")
    p.add_argument("--operation", choices=bench.OPERATIONS, default="sinc_windowed")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--warmup", type=int, default=3)
    p.add_argument("--n-samples", type=int, default=1 << 17)
    p.add_argument("--fs", type=float, default=200e6)
    p.add_argument("--velocity", type=float, default=3000.0)
    _add_velocity_units(p)
    _add_resampler(p, methods=False)
    p.set_defaults(execution="parallel_lut")
    p.add_argument("-o", "--output", type=Path, required=True, help="CSV of trial,duration_ns")
    p.add_argument("--summary", type=Path, default=None, help="JSON summary path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_threads(args)
        info = args.func(args)
    except (CliError, ValueError, RuntimeError) as exc:
        print(f"dispcorr: error: {str(exc).splitlines()[0]}", file=sys.stderr)
        return 1
    print(json.dumps(info, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
