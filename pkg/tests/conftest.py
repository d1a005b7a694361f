import numpy as np
import pytest
from hypothesis import settings

from dispcorr.waveform import SampledSignal

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")

IONO_LFM = dict(f0=413e6, bandwidth=18e6, pulse_width=100e-6)
IONO_FS = 2.048e9
DOPPLER_LFM = dict(f0=411e6, bandwidth=18e6, pulse_width=500e-6)
DOPPLER_FS = 200e6
CHEBYSHEV_LFM = dict(f0=390e6, bandwidth=20e6, pulse_width=100e-6)


def bandlimited(seed: int, n: int, occupied: float = 0.5, sample_rate: float = 1.0, carrier: float = 0.0) -> SampledSignal:
    """Random complex noise whose spectrum fills the central ``occupied`` fraction
    of the Nyquist zone and is zero elsewhere."""
    rng = np.random.default_rng(seed)
    k = np.fft.fftfreq(n)
    spectrum = rng.normal(size=n) + 1j * rng.normal(size=n)
    spectrum[np.abs(k) > occupied / 2] = 0
    return SampledSignal(np.fft.ifft(spectrum) * np.sqrt(n), sample_rate, carrier)


def brute_force_sinc(x: np.ndarray, alpha: float) -> np.ndarray:
    """Unwindowed Whittaker-Shannon sum, one output at a time."""
    n_out = int(np.floor(len(x) / alpha))
    k = np.arange(len(x))
    return np.array([np.sum(x * np.sinc(n * alpha - k)) for n in range(n_out)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
