"""Timing harness: repeated trials, summary statistics, and scaling fits."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import doppler
from .doppler import ResampleStrategy, SincLut
from .ionosphere import IonosphereModel, correct_ionosphere, ionosphere_phase
from .waveform import LfmParams, SampledSignal, generate_lfm

OPERATIONS = ("ionosphere_correct", "ionosphere_phase", "fft_pq", "sinc_windowed", "copy")


@dataclass(frozen=True)
class TimingReport:
    trials: int
    durations: tuple  # seconds
    mean: float
    median: float
    p99: float
    throughput: float  # input samples per second
    n_samples: int

    @classmethod
    def from_durations(cls, durations_ns: Sequence[int], n_samples: int) -> "TimingReport":
        if len(durations_ns) == 0:
            raise ValueError("no timing trials recorded")
        # clock granularity can give 0 ns for trivial work; keep durations positive
        d = np.maximum(np.asarray(durations_ns, dtype=np.int64), 1) * 1e-9
        mean = float(d.mean())
        return cls(
            trials=len(d),
            durations=tuple(float(x) for x in d),
            mean=mean,
            median=float(np.median(d)),
            p99=float(np.percentile(d, 99)),
            throughput=n_samples / mean,
            n_samples=n_samples,
        )

    def summary(self) -> dict:
        out = asdict(self)
        del out["durations"]
        return out

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("trial", "duration_ns"))
            for i, d in enumerate(self.durations):
                w.writerow((i, int(round(d * 1e9))))

    def write_summary(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2) + "\n")


def time_operation(op: Callable[[], object], trials: int = 10_000, warmup: int = 3, n_samples: int = 1) -> TimingReport:
    """Run ``op`` ``warmup`` times untimed, then ``trials`` times on perf_counter_ns.

    ``op`` must close over prepared inputs so only the work itself is timed.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if warmup < 0:
        raise ValueError(f"warmup must be >= 0, got {warmup}")
    try:
        for _ in range(warmup):
            op()
        durations = np.empty(trials, dtype=np.int64)
        clock = time.perf_counter_ns
        for i in range(trials):
            start = clock()
            op()
            durations[i] = clock() - start
    except Exception as exc:
        raise RuntimeError(f"timed operation failed: {exc}") from exc
    return TimingReport.from_durations(durations, n_samples)


@dataclass(frozen=True)
class BenchConfig:
    """Inputs for one named operation. The LFM is scaled to ``n_samples`` by
    stretching the pulse width at the given sample rate."""

    operation: str = "sinc_windowed"
    n_samples: int = 1 << 17
    f0: float = 411e6
    bandwidth: float = 18e6
    sample_rate: float = 200e6
    velocity: float = 3000.0
    tec: float = 1e18
    execution: str = "parallel_lut"
    window_size: int = 25
    lut_density: int = 100
    workers: int | None = None

    def __post_init__(self):
        if self.operation not in OPERATIONS:
            raise ValueError(f"unknown operation {self.operation!r}; choose from {', '.join(OPERATIONS)}")
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")

    def signal(self) -> SampledSignal:
        params = LfmParams(self.f0, self.bandwidth, self.n_samples / self.sample_rate)
        return generate_lfm(params, self.sample_rate, params.center_frequency)


def make_operation(config: BenchConfig) -> Callable[[], object]:
    """Prepare inputs outside the timed region and return the closure to time."""
    signal = config.signal()
    name = config.operation
    alpha = 1.0 / doppler.alpha_from_velocity(config.velocity)
    if name == "ionosphere_correct":
        model = IonosphereModel(config.tec)
        return lambda: correct_ionosphere(signal, model)
    if name == "ionosphere_phase":
        model = IonosphereModel(config.tec)
        n = len(signal)
        return lambda: ionosphere_phase(n, signal.sample_rate, signal.carrier_frequency, model)
    if name == "fft_pq":
        return lambda: doppler.resample_fft_pq(signal, alpha)
    if name == "copy":
        # preallocated destination so only memory traffic is timed
        x = signal.samples
        out = np.empty_like(x)
        return lambda: np.copyto(out, x)
    strategy = ResampleStrategy("sinc_windowed", config.execution, config.window_size)
    lut = SincLut.for_window(config.window_size, config.lut_density) if strategy.uses_lut else None
    return lambda: doppler.resample_sinc(signal, alpha, strategy, lut, config.workers)


def fft_pq_velocity_trials(
    n_samples: int,
    sample_rate: float,
    trials: int,
    max_velocity: float = 5000.0,
    seed: int = 0,
    params: LfmParams | None = None,
    warmup: int = 3,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Time fft_pq corrections at velocities drawn uniformly from [0, max_velocity].

    Returns (velocities, edge bin counts, durations in seconds). Each trial
    times a single call on a record prepared beforehand.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if params is None:
        params = LfmParams(411e6, 18e6, n_samples / sample_rate)
    signal = generate_lfm(params, sample_rate, params.center_frequency)
    n = len(signal)
    rng = np.random.default_rng(seed)
    velocities = rng.uniform(0.0, max_velocity, trials)
    alphas = 1.0 / np.array([doppler.alpha_from_velocity(v) for v in velocities])
    counts = np.array([doppler.fft_pq_edge_count(n, a) for a in alphas])
    for a in alphas[: min(warmup, trials)]:
        doppler.resample_fft_pq(signal, a)
    durations = np.empty(trials)
    clock = time.perf_counter_ns
    for i, a in enumerate(alphas):
        start = clock()
        doppler.resample_fft_pq(signal, a)
        durations[i] = (clock() - start) * 1e-9
    return velocities, counts, durations


def cluster_separation(durations: np.ndarray, labels: np.ndarray) -> tuple[float, dict]:
    """Fraction of log-duration variance explained by ``labels`` (eta squared)
    and the per-label median duration."""
    logd = np.log(np.asarray(durations, dtype=float))
    labels = np.asarray(labels)
    total = float(np.sum((logd - logd.mean()) ** 2))
    between = 0.0
    medians = {}
    for lab in np.unique(labels):
        sel = logd[labels == lab]
        between += sel.size * (sel.mean() - logd.mean()) ** 2
        medians[int(lab)] = float(np.exp(np.median(sel)))
    return (between / total if total > 0 else 0.0), medians


def scaling_check(
    make_op: Callable[[int], Callable[[], object]],
    sizes: Sequence[int],
    trials: int = 5,
    warmup: int = 1,
) -> list[tuple[int, float]]:
    """Median time per size. ``make_op(n)`` prepares inputs and returns the closure.

    Medians, not means, so one scheduler hiccup does not bend the fit.
    """
    sizes = list(sizes)
    if len(sizes) < 3:
        raise ValueError("need at least three sizes")
    if max(sizes) < 8 * min(sizes):
        raise ValueError("sizes must span at least a factor of 8")
    out = []
    for n in sizes:
        report = time_operation(make_op(n), trials, warmup, n)
        out.append((int(n), report.median))
    return out


def loglog_slope(table: Sequence[tuple[int, float]]) -> float:
    """Least-squares slope of log(time) against log(size)."""
    n = np.log([row[0] for row in table])
    t = np.log([row[1] for row in table])
    return float(np.polyfit(n, t, 1)[0])
