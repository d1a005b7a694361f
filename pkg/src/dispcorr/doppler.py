"""Doppler time dilation and the discrete resampling methods that undo it."""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from typing import Literal

import numba
import numpy as np

from . import _kernels
from .waveform import LfmParams, SampledSignal, generate_lfm

C = 299_792_458.0

Method = Literal[
    "sinc_windowed",
    "sinc_exact",
    "fft_pq",
    "fft_pq_with_tone",
    "frequency_conversion",
    "linear",
    "analytic_lfm",
]
Execution = Literal["serial", "parallel_naive", "parallel_lut", "parallel_tiled", "parallel_lut_tiled"]

METHODS = (
    "sinc_windowed",
    "sinc_exact",
    "fft_pq",
    "fft_pq_with_tone",
    "frequency_conversion",
    "linear",
    "analytic_lfm",
)
EXECUTIONS = ("serial", "parallel_naive", "parallel_lut", "parallel_tiled", "parallel_lut_tiled")
LUT_EXECUTIONS = ("parallel_lut", "parallel_lut_tiled")


def alpha_from_velocity(range_rate: float) -> float:
    """Two-way dilation factor (1 + v/c) / (1 - v/c); positive v approaches."""
    if not abs(range_rate) < C:
        raise ValueError(f"|range_rate| must be below c, got {range_rate}")
    beta = range_rate / C
    return (1 + beta) / (1 - beta)


def velocity_from_alpha(alpha: float) -> float:
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return C * (alpha - 1) / (alpha + 1)


@dataclass(frozen=True)
class DopplerParams:
    range_rate: float

    def __post_init__(self):
        alpha_from_velocity(self.range_rate)

    @property
    def alpha(self) -> float:
        return alpha_from_velocity(self.range_rate)


def sinc(x):
    """Normalized sinc with exact zeros at nonzero integers."""
    x = np.asarray(x, dtype=float)
    out = np.sinc(x)
    out[(x == np.floor(x)) & (x != 0)] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class SincLut:
    """sinc(k / density) for k = 0 .. ceil((half_width + 1) * density)."""

    values: np.ndarray
    density: int
    window_half_width: int

    @classmethod
    def build(cls, window_half_width: int, density: int = 100) -> "SincLut":
        if density < 1:
            raise ValueError("LUT density must be at least one value per sample")
        if window_half_width < 0:
            raise ValueError("window half width must be non-negative")
        n = (window_half_width + 1) * density + 1
        values = sinc(np.arange(n) / density)
        values.setflags(write=False)
        return cls(values, int(density), int(window_half_width))

    @classmethod
    def for_window(cls, window_size: int, density: int = 100) -> "SincLut":
        return cls.build((window_size - 1) // 2, density)

    @property
    def spacing(self) -> float:
        return 1.0 / self.density

    def lookup(self, x):
        """Nearest-node value for sinc(x), using evenness."""
        idx = np.floor(np.abs(np.asarray(x, dtype=float)) * self.density + 0.5).astype(int)
        return self.values[idx]


def lut_error_bound(lut: SincLut, window_size: int) -> float:
    """Worst-case per-output error of nearest-node lookup for unit-magnitude input:
    max|sinc'| * spacing / 2 per term, times the number of terms."""
    x = np.linspace(1e-9, lut.window_half_width + 1, 200_001)
    slope = np.max(np.abs((np.cos(np.pi * x) - np.sinc(x)) / x))
    return float(slope * lut.spacing / 2 * window_size)


@dataclass(frozen=True)
class ResampleStrategy:
    method: str = "sinc_windowed"
    execution: str = "serial"
    window_size: int = 25

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.execution not in EXECUTIONS:
            raise ValueError(f"unknown execution {self.execution!r}; choose from {', '.join(EXECUTIONS)}")
        if self.method == "sinc_windowed" and (self.window_size < 3 or self.window_size % 2 == 0):
            raise ValueError(f"window_size must be odd and >= 3, got {self.window_size}")
        if self.method == "sinc_exact" and self.execution in LUT_EXECUTIONS:
            raise ValueError("sinc_exact has no finite window to tabulate; use serial or parallel_naive")

    @property
    def uses_lut(self) -> bool:
        return self.method == "sinc_windowed" and self.execution in LUT_EXECUTIONS

    @property
    def label(self) -> str:
        if self.method == "sinc_windowed":
            return f"{self.method}[{self.window_size}]"
        return self.method


@contextlib.contextmanager
def _threads(workers: int | None):
    if workers is None:
        yield
        return
    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


def _check_alpha(alpha: float) -> None:
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be positive and finite, got {alpha}")


def _output_length(n: int, alpha: float) -> int:
    return int(math.floor(n / alpha))


def _dilate_carrier(samples: np.ndarray, signal: SampledSignal, alpha: float) -> np.ndarray:
    """Apply the carrier part of s(alpha t) for records mixed down from RF."""
    if signal.carrier_frequency == 0 or alpha == 1:
        return samples
    n = np.arange(samples.shape[0])
    shift = signal.carrier_frequency * (alpha - 1)
    return samples * np.exp(2j * np.pi * shift * n / signal.sample_rate)


def resample_sinc(
    signal: SampledSignal,
    alpha: float,
    strategy: ResampleStrategy = ResampleStrategy(),
    lut: SincLut | None = None,
    workers: int | None = None,
) -> SampledSignal:
    """Whittaker-Shannon resampling: output n is the input evaluated at n * alpha samples.

    Output length is floor(N / alpha); input outside [0, N-1] counts as zero.
    """
    signal.require_samples()
    _check_alpha(alpha)
    if strategy.method not in ("sinc_windowed", "sinc_exact"):
        raise ValueError(f"resample_sinc cannot run method {strategy.method!r}")
    if strategy.uses_lut != (lut is not None):
        raise ValueError(
            f"a SincLut must be supplied exactly when execution is one of {LUT_EXECUTIONS}"
        )
    x = np.ascontiguousarray(signal.samples)
    n_in = x.shape[0]
    n_out = _output_length(n_in, alpha)
    alpha = float(alpha)
    with _threads(workers):
        if strategy.method == "sinc_exact":
            out = _kernels.exact(x, alpha, n_out)
        else:
            half = (strategy.window_size - 1) // 2
            if half > n_in - 1:
                raise ValueError(
                    f"window of {strategy.window_size} samples exceeds the {2 * n_in - 1}-sample span of the signal"
                )
            if lut is not None and lut.window_half_width < half:
                raise ValueError(f"LUT covers half width {lut.window_half_width}, window needs {half}")
            ex = strategy.execution
            if ex == "serial":
                out = _kernels.windowed_serial(x, alpha, n_out, half)
            elif ex == "parallel_naive":
                out = _kernels.windowed_parallel(x, alpha, n_out, half)
            elif ex == "parallel_tiled":
                out = _kernels.windowed_tiled(x, alpha, n_out, half, _kernels.TILE)
            elif ex == "parallel_lut":
                out = _kernels.windowed_lut(x, alpha, n_out, half, lut.values, float(lut.density))
            else:
                out = _kernels.windowed_lut_tiled(x, alpha, n_out, half, lut.values, float(lut.density), _kernels.TILE)
    return signal.with_samples(_dilate_carrier(out, signal, alpha))


def resample_linear(signal: SampledSignal, alpha: float) -> SampledSignal:
    """Two-point linear interpolation at n * alpha samples."""
    signal.require_samples()
    _check_alpha(alpha)
    x = signal.samples
    n_in = x.shape[0]
    pos = np.arange(_output_length(n_in, alpha)) * alpha
    i0 = np.floor(pos).astype(np.int64)
    mu = pos - i0
    padded = np.concatenate((x, [0.0]))
    out = (1 - mu) * padded[i0] + mu * padded[np.minimum(i0 + 1, n_in)]
    return signal.with_samples(_dilate_carrier(out, signal, alpha))


def frequency_convert(signal: SampledSignal, shift: float, occupied_band: tuple[float, float] | None = None) -> SampledSignal:
    """Multiply sample k by exp(i 2 pi shift k / fs).

    ``occupied_band`` is the (low, high) extent of the content relative to the
    carrier; when given, the shifted band must stay inside the Nyquist zone.
    """
    signal.require_samples()
    half = signal.sample_rate / 2
    if not abs(shift) < half:
        raise ValueError(f"shift {shift:g} Hz exceeds fs/2 = {half:g} Hz")
    if occupied_band is not None:
        lo, hi = sorted(occupied_band)
        if lo + shift <= -half or hi + shift >= half:
            raise ValueError(
                f"Nyquist violation: band [{lo:g}, {hi:g}] Hz shifted by {shift:g} Hz leaves (-{half:g}, {half:g})"
            )
    if shift == 0:
        return signal.with_samples(signal.samples.copy())
    k = np.arange(len(signal))
    return signal.with_samples(signal.samples * np.exp(2j * np.pi * shift * k / signal.sample_rate))


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def fft_pq_edge_count(n: int, alpha: float) -> int:
    """Bins removed from each spectral edge (negative means zero bins added)."""
    return _round_half_away((n - n / alpha) / 2)


def resample_fft_pq(
    signal: SampledSignal,
    alpha: float,
    with_tone: bool = False,
    center_frequency: float | None = None,
) -> SampledSignal:
    """Resample by trimming or zero-padding the spectrum near +-fs/2.

    N - N/alpha is rounded to an even 2m; m bins go from (or to) each edge and
    the inverse FFT runs at N - 2m points. With ``with_tone`` the dilation left
    over from that rounding is approximated by a frequency shift evaluated at
    the absolute ``center_frequency``.
    """
    signal.require_samples()
    _check_alpha(alpha)
    x = signal.samples
    n = x.shape[0]
    m = fft_pq_edge_count(n, alpha)
    n_new = n - 2 * m
    if n_new < 2:
        raise ValueError(f"fft_pq would leave {n_new} samples")
    if m == 0:
        # nothing to add or remove
        out = x.copy()
    else:
        spectrum = np.fft.fftshift(np.fft.fft(x))
        if m > 0:
            spectrum = spectrum[m : n - m]
        else:
            spectrum = np.concatenate((np.zeros(-m, complex), spectrum, np.zeros(-m, complex)))
        out = np.fft.ifft(np.fft.ifftshift(spectrum)) * (n_new / n)
    achieved = n / n_new
    out = _dilate_carrier(out, signal, achieved)
    result = signal.with_samples(out)
    if with_tone:
        if center_frequency is None:
            raise ValueError("with_tone needs the absolute center_frequency of the signal")
        residual = center_frequency * (alpha / achieved - 1)
        result = frequency_convert(result, residual)
    return result


def resample_lfm_analytic(
    params: LfmParams, alpha: float, sample_rate: float, carrier_frequency: float = 0.0
) -> SampledSignal:
    """Exact s(alpha t) for an LFM: a new chirp with scaled f0, B and pulse width."""
    _check_alpha(alpha)
    return generate_lfm(params.scaled(alpha), sample_rate, carrier_frequency)


def resample(
    signal: SampledSignal,
    alpha: float,
    strategy: ResampleStrategy,
    lut: SincLut | None = None,
    center_frequency: float | None = None,
    workers: int | None = None,
) -> SampledSignal:
    """Apply s(alpha t) to a sampled record with any numeric method.

    ``center_frequency`` (absolute Hz) is required by the tone-based methods.
    """
    method = strategy.method
    if method in ("sinc_windowed", "sinc_exact"):
        return resample_sinc(signal, alpha, strategy, lut, workers)
    if method == "linear":
        return resample_linear(signal, alpha)
    if method == "fft_pq":
        return resample_fft_pq(signal, alpha)
    if method == "fft_pq_with_tone":
        return resample_fft_pq(signal, alpha, True, center_frequency)
    if method == "frequency_conversion":
        if center_frequency is None:
            raise ValueError("frequency_conversion needs the absolute center_frequency")
        _check_alpha(alpha)
        return frequency_convert(signal, center_frequency * (alpha - 1))
    raise ValueError(f"{method} needs analytic waveform parameters, not samples")
