"""Pulse compression, SNR-loss metrics, and the accuracy experiments built on them."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import doppler
from .doppler import ResampleStrategy, SincLut
from .ionosphere import (
    IonosphereModel,
    apply_ionosphere,
    chebyshev_coeffs,
    correct_ionosphere,
    predistort_frequency_cubic,
    predistort_lfm,
)
from .waveform import LfmParams, SampledSignal, generate_lfm

SWEEP_HEADER = ("velocity_mps", "method", "execution", "loss_db")
RESIDUAL_HEADER = ("t_s", "residual_corrected_hz", "residual_original_hz")


@dataclass(frozen=True, eq=False)
class CompressionResult:
    """Cross-correlation of a received record against a reference.

    ``compressed`` holds lags ``lag_offset`` .. ``lag_offset + len - 1``.
    ``peak_magnitude`` is the largest sample magnitude; ``interpolated_peak`` is
    the bandlimited maximum near it, which is not tied to the sample grid.
    """

    compressed: SampledSignal
    lag_offset: int
    peak_index: int
    peak_magnitude: float
    interpolated_peak: float
    interpolated_lag: float
    snr_loss_db: float | None = None

    @property
    def peak_lag(self) -> int:
        return self.peak_index + self.lag_offset

    def magnitude_db(self, reference_peak: float) -> np.ndarray:
        """Compressed magnitude in dB relative to ``reference_peak``."""
        mag = np.abs(self.compressed.samples)
        with np.errstate(divide="ignore"):
            return 20 * np.log10(mag / reference_peak)


def _refine_peak(spectrum: np.ndarray, index: int) -> tuple[float, float]:
    n = spectrum.shape[0]
    k = np.fft.fftfreq(n) * n

    def negative_magnitude(tau):
        return -abs(np.sum(spectrum * np.exp(2j * np.pi * k * tau / n))) / n

    res = minimize_scalar(
        negative_magnitude, bounds=(index - 1.0, index + 1.0), method="bounded", options={"xatol": 1e-6}
    )
    return -float(res.fun), float(res.x)


def matched_filter(
    received: SampledSignal,
    reference: SampledSignal,
    reference_peak: float | None = None,
    interpolate: bool = True,
) -> CompressionResult:
    """FFT cross-correlation of ``received`` with ``reference``.

    Both are zero-padded to the next power of two at or above
    N_rx + N_ref - 1, so every lag from -(N_ref - 1) to N_rx - 1 is linear.
    When ``reference_peak`` is given the loss against it is filled in.
    """
    if received.sample_rate != reference.sample_rate:
        raise ValueError(
            f"sample rates differ: received {received.sample_rate:g} Hz, reference {reference.sample_rate:g} Hz"
        )
    reference.require_samples()
    received.require_samples()
    n_rx, n_ref = len(received), len(reference)
    n_fft = 1 << (n_rx + n_ref - 2).bit_length()
    spectrum = np.fft.fft(received.samples, n_fft) * np.conj(np.fft.fft(reference.samples, n_fft))
    circular = np.fft.ifft(spectrum)
    # lags -(n_ref-1)..-1 sit at the end of the circular result
    linear = np.concatenate((circular[n_fft - n_ref + 1 :], circular[:n_rx]))
    mag = np.abs(linear)
    peak_index = int(np.argmax(mag))
    peak = float(mag[peak_index])
    lag_offset = -(n_ref - 1)
    interp_peak, interp_lag = peak, float(peak_index + lag_offset)
    if interpolate and peak > 0:
        circ_index = (peak_index + lag_offset) % n_fft
        refined, tau = _refine_peak(spectrum, circ_index)
        if refined > peak:
            interp_peak, interp_lag = refined, tau - circ_index + peak_index + lag_offset
    compressed = SampledSignal(
        linear, received.sample_rate, received.carrier_frequency, description="matched filter output"
    )
    result = CompressionResult(compressed, lag_offset, peak_index, peak, interp_peak, interp_lag)
    if reference_peak is not None:
        result = CompressionResult(
            compressed, lag_offset, peak_index, peak, interp_peak, interp_lag, snr_loss(result, reference_peak)
        )
    return result


def snr_loss(candidate: CompressionResult, reference_peak: float, interpolated: bool = True) -> float:
    """20 log10(reference_peak / candidate peak) in dB; 0 means no loss."""
    if not reference_peak > 0:
        raise ValueError(f"reference_peak must be positive, got {reference_peak}")
    peak = candidate.interpolated_peak if interpolated else candidate.peak_magnitude
    if not peak > 0:
        raise ValueError("candidate has a zero matched-filter peak")
    return 20 * math.log10(reference_peak / peak)


def autocorrelation_peak(signal: SampledSignal, interpolate: bool = True) -> float:
    r = matched_filter(signal, signal, interpolate=interpolate)
    return r.interpolated_peak if interpolate else r.peak_magnitude


def embed(signal: SampledSignal, length: int) -> SampledSignal:
    """Center ``signal`` in a silent record of ``length`` samples."""
    n = len(signal)
    if length < n:
        raise ValueError(f"cannot embed {n} samples in a {length}-sample window")
    start = (length - n) // 2
    out = np.zeros(length, dtype=np.complex128)
    out[start : start + n] = signal.samples
    return signal.with_samples(out)


# Doppler ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    velocity_mps: float
    method: str
    execution: str
    loss_db: float


def correct_doppler(
    echo: SampledSignal,
    echo_params: LfmParams,
    alpha: float,
    strategy: ResampleStrategy,
    lut: SincLut | None = None,
    workers: int | None = None,
) -> SampledSignal:
    """Undo a dilation by ``alpha`` by resampling with 1 / alpha.

    ``echo_params`` describe the echo itself; the analytic method regenerates
    it and the tone-based methods use its center frequency.
    """
    inverse = 1.0 / alpha
    if strategy.method == "analytic_lfm":
        return doppler.resample_lfm_analytic(echo_params, inverse, echo.sample_rate, echo.carrier_frequency)
    return doppler.resample(echo, inverse, strategy, lut, echo_params.center_frequency, workers)


def doppler_loss(
    params: LfmParams,
    sample_rate: float,
    velocity: float,
    strategy: ResampleStrategy,
    carrier_frequency: float | None = None,
    lut: SincLut | None = None,
    reference: SampledSignal | None = None,
    reference_peak: float | None = None,
    workers: int | None = None,
) -> float:
    """Loss in dB after dilating an LFM analytically and correcting it with ``strategy``."""
    carrier = params.center_frequency if carrier_frequency is None else carrier_frequency
    if reference is None:
        reference = generate_lfm(params, sample_rate, carrier)
    if reference_peak is None:
        reference_peak = autocorrelation_peak(reference)
    alpha = doppler.alpha_from_velocity(velocity)
    echo_params = params.scaled(alpha)
    echo = doppler.resample_lfm_analytic(params, alpha, sample_rate, carrier)
    corrected = correct_doppler(echo, echo_params, alpha, strategy, lut, workers)
    return snr_loss(matched_filter(corrected, reference), reference_peak)


def doppler_loss_sweep(
    params: LfmParams,
    sample_rate: float,
    velocities: Sequence[float],
    methods: Sequence[ResampleStrategy],
    carrier_frequency: float | None = None,
    lut_density: int = 100,
    workers: int | None = None,
) -> list[SweepRow]:
    """Loss for every (velocity, method) pair, in input order.

    The carrier defaults to the chirp's center frequency so the band sits
    symmetrically around DC.
    """
    velocities = list(velocities)
    methods = list(methods)
    if not velocities or not methods:
        raise ValueError("velocities and methods must be non-empty")
    for v in velocities:
        doppler.alpha_from_velocity(v)
    carrier = params.center_frequency if carrier_frequency is None else carrier_frequency
    reference = generate_lfm(params, sample_rate, carrier)
    reference_peak = autocorrelation_peak(reference)
    luts = {s.window_size: SincLut.for_window(s.window_size, lut_density) for s in methods if s.uses_lut}

    def cell(job):
        v, s = job
        loss = doppler_loss(
            params, sample_rate, v, s, carrier, luts.get(s.window_size) if s.uses_lut else None, reference, reference_peak
        )
        return SweepRow(float(v), s.label, s.execution, loss)

    jobs = [(v, s) for v in velocities for s in methods]
    if workers is None or workers <= 1:
        return [cell(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(cell, jobs))


def critical_velocities(n_samples: int, max_velocity: float) -> list[tuple[int, float]]:
    """Velocities whose echo is exactly n_samples - k samples long, for k = 0, 1, ...

    The 1/alpha correction then has to add exactly k samples, so fft_pq is
    exact for even k and worst for odd k.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    out = []
    k = 0
    while k < n_samples - 1:
        v = doppler.velocity_from_alpha(n_samples / (n_samples - k))
        if v > max_velocity:
            break
        out.append((k, v))
        k += 1
    return out


def write_sweep_csv(path: str | Path, rows: Iterable[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow((repr(r.velocity_mps), r.method, r.execution, repr(r.loss_db)))


# Ionosphere ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ResidualTable:
    t: np.ndarray
    corrected: np.ndarray
    original: np.ndarray

    def max_ratio(self) -> float:
        """max original residual / max corrected residual."""
        return float(self.original.max() / self.corrected.max())

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(RESIDUAL_HEADER)
            for row in zip(self.t, self.corrected, self.original):
                w.writerow([repr(float(x)) for x in row])


def chebyshev_residual_sweep(params: LfmParams, model: IonosphereModel, times) -> ResidualTable:
    """|f_poly(t) - f_cubic(t)| for both polynomial variants."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-D sequence")
    truth = predistort_frequency_cubic(t, params, model)
    corrected = np.abs(chebyshev_coeffs(params, model, "corrected").frequency(t) - truth)
    original = np.abs(chebyshev_coeffs(params, model, "original").frequency(t) - truth)
    return ResidualTable(t, corrected, original)


def predistortion_loss(
    params: LfmParams, model: IonosphereModel, sample_rate: float, method: str, truth: str = "cubic_trapezoid"
) -> float:
    """Loss of one predistorted pulse matched against another (the truth) in dB."""
    reference = predistort_lfm(params, model, sample_rate, truth)
    candidate = predistort_lfm(params, model, sample_rate, method)
    return snr_loss(matched_filter(candidate, reference), autocorrelation_peak(reference))


TRACE_NAMES = ("LFM", "POLY", "FFT", "CUBIC")

# rectangular gating sidelobes reach about -71 dB at the far band edge
GATED_FLOOR_DB = -60.0


@dataclass(frozen=True, eq=False)
class IonoComparison:
    """Pulse-compressed traces for the ionosphere comparison.

    LFM is the uncorrected echo against the plain chirp. POLY, FFT and CUBIC
    are the three predistorted transmit pulses each matched against the cubic
    pulse. ``losses`` are in dB against the relevant autocorrelation peak;
    ``round_trip`` is correct(apply(lfm)) against the plain chirp and
    ``cubic_received`` is the cubic pulse sent through the ionosphere against
    the plain chirp.
    """

    traces: dict
    losses: dict
    round_trip: float
    cubic_received: float
    reference_peaks: dict

    def write_csv(self, path: str | Path, half_span: int = 2048) -> None:
        """Magnitudes in dB (each trace against its own reference peak) around each peak."""
        cols = []
        for name in TRACE_NAMES:
            r = self.traces[name]
            db = r.magnitude_db(self.reference_peaks[name])
            lo = max(r.peak_index - half_span, 0)
            cols.append(db[lo : r.peak_index + half_span + 1])
        n = min(len(c) for c in cols)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("lag_from_peak", *(f"{name.lower()}_db" for name in TRACE_NAMES)))
            first = self.traces[TRACE_NAMES[0]]
            start = max(first.peak_index - half_span, 0) - first.peak_index
            for i in range(n):
                w.writerow((start + i, *(f"{c[i]:.6f}" for c in cols)))


def compare_ionosphere(
    params: LfmParams,
    model: IonosphereModel,
    sample_rate: float,
    window: int | None = None,
    passes: int = 2,
    floor_db: float = GATED_FLOOR_DB,
) -> IonoComparison:
    """Run the four-way comparison of ionospheric correction methods.

    Pulses are centered in a silent receive window of ``window`` samples
    (default: next power of two at least twice the pulse plus the
    largest dispersive shift) so the FFT filters do not wrap. Gating a pulse
    inside a longer record leaks about -71 dB into bins at or below 0 Hz, so
    the spectral energy check runs at ``floor_db`` rather than the library
    default.
    """
    lfm = generate_lfm(params, sample_rate)
    cubic = predistort_lfm(params, model, sample_rate, "cubic_trapezoid")
    poly = predistort_lfm(params, model, sample_rate, "chebyshev_corrected")
    if window is None:
        shift = passes * model.k2 / (299_792_458.0 * params.f0**2) * sample_rate
        window = 1 << int(2 * len(lfm) + 2 * math.ceil(shift) - 1).bit_length()
    lfm_rx = apply_ionosphere(embed(lfm, window), model, passes, floor_db)
    fft_tx = correct_ionosphere(embed(lfm, window), model, passes, floor_db)
    lfm_peak = autocorrelation_peak(lfm)
    cubic_peak = autocorrelation_peak(cubic)
    traces = {
        "LFM": matched_filter(lfm_rx, lfm, lfm_peak),
        "POLY": matched_filter(poly, cubic, cubic_peak),
        "FFT": matched_filter(fft_tx, cubic, cubic_peak),
        "CUBIC": matched_filter(cubic, cubic, cubic_peak),
    }
    losses = {name: r.snr_loss_db for name, r in traces.items()}
    round_trip = matched_filter(correct_ionosphere(lfm_rx, model, passes, floor_db), lfm, lfm_peak).snr_loss_db
    cubic_rx = apply_ionosphere(embed(cubic, window), model, passes, floor_db)
    cubic_received = matched_filter(cubic_rx, lfm, lfm_peak).snr_loss_db
    peaks = {"LFM": lfm_peak, "POLY": cubic_peak, "FFT": cubic_peak, "CUBIC": cubic_peak}
    return IonoComparison(traces, losses, round_trip, cubic_received, peaks)
