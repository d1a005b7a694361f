"""Ionospheric group delay, FFT-domain distortion/correction, and the analytic
LFM predistortion methods (exact cubic root and pseudo-Chebyshev polynomial)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import constants

from .waveform import LfmParams, SampledSignal, check_band

C = constants.c
TECU = 1e16  # electrons / m^2

# q_e^2 / (8 pi^2 m_e eps0) in SI; about 40.31 m^3/s^2
PLASMA_CONSTANT = constants.e**2 / (8 * math.pi**2 * constants.m_e * constants.epsilon_0)

# pseudo-Chebyshev node, cos(pi/6)
CHEBYSHEV_NODE = math.sqrt(3) / 2

ENERGY_FLOOR_DB = -80.0

Variant = Literal["corrected", "original"]
PredistortMethod = Literal["cubic_trapezoid", "chebyshev_corrected", "chebyshev_original"]


@dataclass(frozen=True)
class IonosphereModel:
    """Total electron content ``tec`` (el/m^2) along the path."""

    tec: float

    def __post_init__(self):
        if not self.tec >= 0:
            raise ValueError(f"tec must be non-negative, got {self.tec}")

    @classmethod
    def from_tecu(cls, tecu: float) -> "IonosphereModel":
        return cls(tecu * TECU)

    @property
    def k2(self) -> float:
        """Plasma delay constant K2 = q_e^2 E / (8 pi^2 m_e eps0)."""
        return PLASMA_CONSTANT * self.tec


def group_delay(frequency, model: IonosphereModel):
    """One-way delay K2 / (c f^2) in seconds. Accepts scalars or arrays."""
    f = np.asarray(frequency, dtype=float)
    if np.any(f <= 0):
        raise ValueError("group delay is undefined for non-positive frequency")
    tau = model.k2 / (C * f**2)
    return float(tau) if tau.ndim == 0 else tau


def bin_frequencies(n: int, sample_rate: float, carrier_frequency: float = 0.0) -> np.ndarray:
    """Absolute frequency of each FFT bin in numpy's ordering."""
    return carrier_frequency + np.fft.fftfreq(n, d=1.0 / sample_rate)


def ionosphere_phase(n: int, sample_rate: float, carrier_frequency: float, model: IonosphereModel, passes: int = 2) -> np.ndarray:
    """Per-bin phase 2*pi*passes*K2/(c f). Non-positive bins get zero.

    Multiplying an e^{-i 2 pi f t} spectrum by exp(+i * phase) delays the envelope
    at f by passes * tau(f).
    """
    f = bin_frequencies(n, sample_rate, carrier_frequency)
    phase = np.zeros(n)
    pos = f > 0
    phase[pos] = 2 * np.pi * passes * model.k2 / (C * f[pos])
    return phase


def _check_spectrum(spectrum: np.ndarray, freqs: np.ndarray, floor_db: float) -> None:
    mag = np.abs(spectrum)
    peak = mag.max()
    if peak == 0:
        return
    bad = np.flatnonzero((freqs <= 0) & (mag > peak * 10 ** (floor_db / 20)))
    if bad.size:
        shown = ", ".join(f"{k} ({freqs[k]:.4g} Hz)" for k in bad[:5])
        more = f" and {bad.size - 5} more" if bad.size > 5 else ""
        raise ValueError(
            f"{bad.size} bins at non-positive absolute frequency carry energy above "
            f"{floor_db:g} dB of peak: {shown}{more}"
        )


def _check_passes(passes: int) -> None:
    if passes not in (1, 2):
        raise ValueError(f"passes must be 1 (one-way) or 2 (two-way), got {passes}")


def _ionosphere_filter(signal: SampledSignal, model: IonosphereModel, passes: int, sign: float, floor_db: float) -> SampledSignal:
    signal.require_samples()
    _check_passes(passes)
    n = len(signal)
    spectrum = np.fft.fft(signal.samples)
    if model.k2 == 0:
        return signal.with_samples(np.fft.ifft(spectrum))
    freqs = bin_frequencies(n, signal.sample_rate, signal.carrier_frequency)
    _check_spectrum(spectrum, freqs, floor_db)
    phase = ionosphere_phase(n, signal.sample_rate, signal.carrier_frequency, model, passes)
    return signal.with_samples(np.fft.ifft(spectrum * np.exp(sign * 1j * phase)))


def apply_ionosphere(signal: SampledSignal, model: IonosphereModel, passes: int = 2, floor_db: float = ENERGY_FLOOR_DB) -> SampledSignal:
    """Distort ``signal`` by the dispersive delay of ``passes`` trips through the ionosphere."""
    return _ionosphere_filter(signal, model, passes, +1.0, floor_db)


def correct_ionosphere(signal: SampledSignal, model: IonosphereModel, passes: int = 2, floor_db: float = ENERGY_FLOOR_DB) -> SampledSignal:
    """Remove the distortion added by :func:`apply_ionosphere` (conjugate phase)."""
    return _ionosphere_filter(signal, model, passes, -1.0, floor_db)


@dataclass(frozen=True)
class ChebyshevCoeffs:
    """Quadratic predistortion f(t) = f0 + (mu0 + delta_mu) t + gamma t^2.

    ``t1`` and ``t3`` are the transmit-time offsets of the -a and +a Chebyshev
    nodes from the centre-frequency node; ``t2 = t1 + t3``.
    """

    f0: float
    mu0: float
    delta_mu: float
    gamma: float
    t1: float
    t2: float
    t3: float
    a: float
    variant: str

    def frequency(self, t):
        t = np.asarray(t, dtype=float)
        return self.f0 + (self.mu0 + self.delta_mu) * t + self.gamma * t**2

    def phase(self, t):
        """Exact integral 2*pi*int_0^t f, in radians."""
        t = np.asarray(t, dtype=float)
        return 2 * np.pi * (self.f0 * t + (self.mu0 + self.delta_mu) * t**2 / 2 + self.gamma * t**3 / 3)


def chebyshev_coeffs(params: LfmParams, model: IonosphereModel, variant: Variant = "corrected") -> ChebyshevCoeffs:
    """Pseudo-Chebyshev coefficients. ``variant="original"`` doubles the K2 prefactor
    (4 K2/c instead of 2 K2/c) as in the earlier published form."""
    if variant == "corrected":
        factor = 2.0
    elif variant == "original":
        factor = 4.0
    else:
        raise ValueError(f"unknown variant {variant!r}")
    a = CHEBYSHEV_NODE
    f0, B, T = params.f0, params.bandwidth, params.pulse_width
    k = factor * model.k2 / C
    f_mid = f0 + B / 2
    f_lo = f0 + B * (1 - a) / 2
    f_hi = f0 + B * (1 + a) / 2
    t1 = -a * T / 2 + k * (f_mid**-2 - f_lo**-2)
    t3 = a * T / 2 + k * (f_mid**-2 - f_hi**-2)
    t2 = k * (2 * f_mid**-2 - f_lo**-2 - f_hi**-2)
    denom = t1 * t3 * (t3 - t1)
    # near-coincident nodes blow the coefficients up long before exact zero
    if min(abs(t1), abs(t3), abs(t3 - t1)) <= 1e-9 * T:
        raise ValueError(f"degenerate pseudo-Chebyshev nodes: t1={t1:g} s, t3={t3:g} s, T={T:g} s")
    mu0 = B / T
    slope = (a * B / 2) * (t1**2 + t3**2) / -denom
    gamma = (a * B / 2) * t2 / denom
    return ChebyshevCoeffs(f0, mu0, slope - mu0, gamma, t1, t2, t3, a, variant)


def _cubic_terms(t, params: LfmParams, model: IonosphereModel):
    f0, B, T = params.f0, params.bandwidth, params.pulse_width
    q = 2 * model.k2 * B / (C * T)
    p = f0 + B * t / T - q / f0**2
    return p, q


def cubic_roots(t, params: LfmParams, model: IonosphereModel) -> np.ndarray:
    """All three roots of f^3 - p(t) f^2 - q = 0 by the closed-form cubic formula.

    Returns a complex array of shape (3, len(t)).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    p, q = _cubic_terms(t, params, model)
    chi = p**2
    psi = -2 * p**3 - 27 * q
    omega = ((psi + np.sqrt((psi**2 - 4 * chi**3).astype(complex))) / 2) ** (1 / 3)
    rotations = np.exp(2j * np.pi * np.arange(3) / 3)[:, None]
    w = omega[None, :] * rotations
    return (p - w - chi / w) / 3


def predistort_frequency_cubic(t, params: LfmParams, model: IonosphereModel, polish: bool = True):
    """Transmit frequency whose ionospheric arrival time lands on the LFM line.

    Picks the nearly real root closest to f0 + B t / T. One Newton step on the
    real cubic tidies the last bits lost in the closed form.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    T = params.pulse_width
    if np.any((t < 0) | (t > T)):
        raise ValueError(f"t must lie in [0, {T:g}]")
    linear = params.f0 + params.bandwidth * t / T
    if model.k2 == 0:
        return float(linear[0]) if scalar else linear
    roots = cubic_roots(t, params, model)
    real_enough = np.abs(roots.imag) <= 1e-9 * np.abs(roots)
    if not np.all(real_enough.any(axis=0)):
        bad = t[~real_enough.any(axis=0)]
        raise ValueError(f"no real root of the predistortion cubic at t = {bad[:3]}")
    distance = np.where(real_enough, np.abs(roots.real - linear), np.inf)
    f = roots.real[np.argmin(distance, axis=0), np.arange(t.size)]
    if polish:
        p, q = _cubic_terms(t, params, model)
        deriv = 3 * f**2 - 2 * p * f
        ok = deriv != 0
        f = np.where(ok, f - (f**3 - p * f**2 - q) / np.where(ok, deriv, 1.0), f)
    return float(f[0]) if scalar else f


def trapezoid_phase(frequency: np.ndarray, sample_rate: float) -> np.ndarray:
    """Cumulative 2*pi*int f dt with one trapezoid per sample, starting at 0."""
    steps = (frequency[1:] + frequency[:-1]) / (2 * sample_rate)
    return 2 * np.pi * np.concatenate(([0.0], np.cumsum(steps)))


def predistort_lfm(
    params: LfmParams,
    model: IonosphereModel,
    sample_rate: float,
    method: PredistortMethod = "cubic_trapezoid",
    carrier_frequency: float = 0.0,
) -> SampledSignal:
    """Transmit waveform that arrives as the undistorted LFM after two-way propagation."""
    n = params.n_samples(sample_rate)
    t = np.arange(n) / sample_rate
    if method == "cubic_trapezoid":
        f = predistort_frequency_cubic(t, params, model)
        phase = trapezoid_phase(f, sample_rate)
    elif method in ("chebyshev_corrected", "chebyshev_original"):
        coeffs = chebyshev_coeffs(params, model, method.split("_", 1)[1])
        f = coeffs.frequency(t)
        phase = coeffs.phase(t)
    else:
        raise ValueError(f"unknown predistortion method {method!r}")
    if n:
        check_band(float(f.min()), float(f.max()), sample_rate, carrier_frequency)
    phase = phase - 2 * np.pi * carrier_frequency * t
    return SampledSignal(
        np.exp(1j * phase),
        sample_rate,
        carrier_frequency,
        description=f"{method} predistorted LFM, TEC={model.tec:g}",
    )
