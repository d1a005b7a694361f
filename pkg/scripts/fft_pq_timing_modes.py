"""fft_pq duration at random range rates, grouped by how many bins are added or removed."""

import argparse
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dispcorr.bench import cluster_separation, fft_pq_velocity_trials


@dataclass
class Config:
    n_samples: int = 1 << 17
    pulse_width: float = 500e-6
    trials: int = 1000
    max_velocity: float = 5000.0
    seed: int = 0
    out: str = "results/fft_pq_timing.csv"


def run(cfg: Config):
    fs = cfg.n_samples / cfg.pulse_width
    v, counts, durations = fft_pq_velocity_trials(cfg.n_samples, fs, cfg.trials, cfg.max_velocity, cfg.seed)
    Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("velocity_mps", "edge_bins", "duration_ns"))
        for row in zip(v, counts, durations):
            w.writerow((repr(float(row[0])), int(row[1]), int(round(row[2] * 1e9))))
    return cluster_separation(durations, counts), counts


def main():
    d = Config()
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-samples", type=int, default=d.n_samples)
    ap.add_argument("--pulse-width", type=float, default=d.pulse_width)
    ap.add_argument("--trials", type=int, default=d.trials)
    ap.add_argument("--max-velocity", type=float, default=d.max_velocity)
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--out", default=d.out)
    cfg = Config(**vars(ap.parse_args()))
    (eta, medians), counts = run(cfg)
    print(f"eta^2 of log duration by edge count: {eta:.3f}")
    for m, t in sorted(medians.items()):
        print(f"  edge bins {m:+d}: {np.sum(counts == m):5d} trials, median {t * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
