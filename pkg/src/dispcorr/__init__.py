"""Ionospheric and Doppler dispersion correction for sampled radar waveforms."""

from .analysis import CompressionResult, matched_filter, snr_loss
from .doppler import DopplerParams, ResampleStrategy, SincLut, alpha_from_velocity, resample
from .ionosphere import IonosphereModel, apply_ionosphere, correct_ionosphere, predistort_lfm
from .waveform import LfmParams, SampledSignal, generate_lfm, read_signal, write_signal

__version__ = "0.1.0"

__all__ = [
    "CompressionResult",
    "matched_filter",
    "snr_loss",
    "DopplerParams",
    "ResampleStrategy",
    "SincLut",
    "alpha_from_velocity",
    "resample",
    "IonosphereModel",
    "apply_ionosphere",
    "correct_ionosphere",
    "predistort_lfm",
    "LfmParams",
    "SampledSignal",
    "generate_lfm",
    "read_signal",
    "write_signal",
]
