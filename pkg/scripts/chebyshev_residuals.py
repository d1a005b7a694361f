"""Frequency error of the two pseudo-Chebyshev coefficient sets against the cubic
root, and the matched-filter loss each incurs against the cubic pulse."""

import argparse
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from dispcorr.analysis import chebyshev_residual_sweep, predistortion_loss
from dispcorr.ionosphere import IonosphereModel
from dispcorr.waveform import LfmParams


@dataclass
class Config:
    f0: float = 390e6
    bandwidth: float = 20e6
    pulse_width: float = 100e-6
    sample_rate: float = 2.048e9
    tecu: float = 100.0
    points: int = 1001
    out_dir: str = "results/chebyshev"


def run(cfg: Config) -> dict:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = LfmParams(cfg.f0, cfg.bandwidth, cfg.pulse_width)
    model = IonosphereModel.from_tecu(cfg.tecu)
    table = chebyshev_residual_sweep(params, model, np.linspace(0, cfg.pulse_width, cfg.points))
    table.write_csv(out / "residuals.csv")
    summary = {
        "config": asdict(cfg),
        "max_residual_corrected_hz": float(table.corrected.max()),
        "max_residual_original_hz": float(table.original.max()),
        "ratio": table.max_ratio(),
        "loss_corrected_db": predistortion_loss(params, model, cfg.sample_rate, "chebyshev_corrected"),
        "loss_original_db": predistortion_loss(params, model, cfg.sample_rate, "chebyshev_original"),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(Config()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    print(json.dumps(run(Config(**vars(ap.parse_args()))), indent=2))


if __name__ == "__main__":
    main()
