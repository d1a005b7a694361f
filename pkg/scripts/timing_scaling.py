"""Median run time against record length for each sinc execution strategy,
plus window-size and memory-copy baselines."""

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

from dispcorr.bench import BenchConfig, loglog_slope, make_operation, scaling_check
from dispcorr.doppler import EXECUTIONS


@dataclass
class Config:
    sizes: list = field(default_factory=lambda: [1 << 14, 1 << 16, 1 << 18, 1 << 19])
    windows: list = field(default_factory=lambda: [11, 25, 51])
    trials: int = 7
    workers: int | None = None
    out: str = "results/timing_scaling.csv"


def run(cfg: Config):
    rows, slopes = [], {}
    cases = [("sinc_windowed", ex, 25) for ex in EXECUTIONS]
    cases += [("sinc_windowed", "parallel_naive", w) for w in cfg.windows if w != 25]
    cases += [("copy", "serial", 0)]
    for op, ex, w in cases:
        def make(n):
            return make_operation(BenchConfig(op, n_samples=n, execution=ex, window_size=w or 25, workers=cfg.workers))

        table = scaling_check(make, cfg.sizes, cfg.trials)
        slopes[(op, ex, w)] = loglog_slope(table)
        rows += [(op, ex, w, n, t) for n, t in table]
    Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
    with open(cfg.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(("operation", "execution", "window", "n_samples", "median_s"))
        wr.writerows(rows)
    return slopes


def main():
    d = Config()
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=d.sizes)
    ap.add_argument("--windows", type=int, nargs="+", default=d.windows)
    ap.add_argument("--trials", type=int, default=d.trials)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default=d.out)
    cfg = Config(**vars(ap.parse_args()))
    for (op, ex, w), s in run(cfg).items():
        print(f"{op:14s} {ex:20s} window {w:3d}  slope {s:.2f}")


if __name__ == "__main__":
    main()
