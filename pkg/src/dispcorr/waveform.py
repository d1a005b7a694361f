"""Sampled complex signals, LFM chirps and tones, and the I/Q file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

SIDECAR_SUFFIX = ".json"


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Uniformly sampled complex I/Q record.

    ``carrier_frequency`` is the absolute RF frequency represented by DC of the
    record. It is 0 when the samples encode absolute frequencies directly.
    """

    samples: np.ndarray
    sample_rate: float
    carrier_frequency: float = 0.0
    description: str = field(default="", compare=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128).view()
        if samples.ndim != 1:
            raise ValueError(f"samples must be one-dimensional, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain NaN or Inf")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))
        object.__setattr__(self, "carrier_frequency", float(self.carrier_frequency))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def times(self) -> np.ndarray:
        return np.arange(len(self)) / self.sample_rate

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    def with_samples(self, samples: np.ndarray) -> "SampledSignal":
        return replace(self, samples=samples)

    def require_samples(self) -> None:
        if len(self) == 0:
            raise ValueError("signal has no samples")


@dataclass(frozen=True)
class LfmParams:
    """Linear FM chirp: start frequency ``f0`` (Hz), sweep ``bandwidth`` (Hz)
    and ``pulse_width`` (s). Negative bandwidth gives a down-chirp."""

    f0: float
    bandwidth: float
    pulse_width: float

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError(f"f0 must be positive, got {self.f0}")
        if not self.pulse_width > 0:
            raise ValueError(f"pulse_width must be positive, got {self.pulse_width}")
        if not self.f0 + self.bandwidth > 0:
            raise ValueError("chirp crosses zero frequency (f0 + bandwidth <= 0)")

    @property
    def chirp_rate(self) -> float:
        return self.bandwidth / self.pulse_width

    @property
    def center_frequency(self) -> float:
        return self.f0 + self.bandwidth / 2

    @property
    def stop_frequency(self) -> float:
        return self.f0 + self.bandwidth

    def n_samples(self, sample_rate: float) -> int:
        # Python's round() is half-to-even
        return int(round(self.pulse_width * sample_rate))

    def scaled(self, alpha: float) -> "LfmParams":
        """Parameters of the chirp s(alpha * t)."""
        return LfmParams(alpha * self.f0, alpha * self.bandwidth, self.pulse_width / alpha)


def check_band(f_low: float, f_high: float, sample_rate: float, carrier_frequency: float = 0.0) -> None:
    """Reject an absolute band [f_low, f_high] that does not fit the complex Nyquist
    zone (-fs/2, fs/2) around ``carrier_frequency``."""
    half = sample_rate / 2
    lo, hi = sorted((f_low - carrier_frequency, f_high - carrier_frequency))
    if lo <= -half or hi >= half:
        raise ValueError(
            f"Nyquist violation: band [{f_low:.6g}, {f_high:.6g}] Hz around carrier "
            f"{carrier_frequency:.6g} Hz needs |offset| < fs/2 = {half:.6g} Hz"
        )


def generate_lfm(params: LfmParams, sample_rate: float, carrier_frequency: float = 0.0) -> SampledSignal:
    """Unit-amplitude chirp exp(i*2*pi*(f0*t + B*t**2/(2T))) sampled from t = 0.

    With a nonzero ``carrier_frequency`` the record is mixed down by that carrier.
    """
    if not sample_rate > 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    check_band(params.f0, params.stop_frequency, sample_rate, carrier_frequency)
    t = np.arange(params.n_samples(sample_rate)) / sample_rate
    cycles = (params.f0 - carrier_frequency) * t + params.chirp_rate / 2 * t**2
    return SampledSignal(
        np.exp(2j * np.pi * cycles),
        sample_rate,
        carrier_frequency,
        description=f"LFM f0={params.f0:g} B={params.bandwidth:g} T={params.pulse_width:g}",
    )


def generate_tone(frequency: float, duration: float, sample_rate: float, carrier_frequency: float = 0.0) -> SampledSignal:
    if not sample_rate > 0:
        raise ValueError(f"sample_rate must be positive, got {sample_rate}")
    check_band(frequency, frequency, sample_rate, carrier_frequency)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    return SampledSignal(
        np.exp(2j * np.pi * (frequency - carrier_frequency) * t),
        sample_rate,
        carrier_frequency,
        description=f"tone f={frequency:g}",
    )


def instantaneous_frequency(signal: SampledSignal) -> np.ndarray:
    """Absolute frequency estimate from adjacent-sample phase differences.

    Element k belongs to the midpoint between samples k and k+1.
    """
    dphi = np.angle(signal.samples[1:] * np.conj(signal.samples[:-1]))
    return signal.carrier_frequency + dphi * signal.sample_rate / (2 * np.pi)


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + SIDECAR_SUFFIX)


def write_signal(path: str | Path, signal: SampledSignal, description: str | None = None) -> None:
    """Write little-endian complex64 samples plus a JSON sidecar at ``<path>.json``."""
    path = Path(path)
    np.asarray(signal.samples, dtype="<c8").tofile(path)
    meta = {
        "sample_rate_hz": signal.sample_rate,
        "carrier_frequency_hz": signal.carrier_frequency,
        "description": signal.description if description is None else description,
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=2) + "\n")


def read_signal(path: str | Path) -> SampledSignal:
    path = Path(path)
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise ValueError(f"missing sidecar {meta_path}")
    meta = json.loads(meta_path.read_text())
    try:
        fs = float(meta["sample_rate_hz"])
    except KeyError:
        raise ValueError(f"{meta_path}: sample_rate_hz missing") from None
    samples = np.fromfile(path, dtype="<c8").astype(np.complex128)
    return SampledSignal(
        samples,
        fs,
        float(meta.get("carrier_frequency_hz", 0.0)),
        description=str(meta.get("description", "")),
    )
