"""Crossings along s at several r, a line fit, and the bound slopes it should sit between.

    python scripts/slope_experiment.py --k 3 --n 50 --out results/slope_k3.csv
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from cnfxor.bounds import lower_slope, upper_slope
from cnfxor.lab import estimate_crossing, fit_slope, write_crossings_csv, write_manifest


@dataclass
class SlopeConfig:
    k: int = 3
    n: int = 50
    r_values: list = field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 2.0])
    s_interval: tuple = (0.2, 1.4)
    trials: int = 50
    seed: int = 10
    workers: int = 4


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--r-values", default="0,0.5,1,1.5,2")
    ap.add_argument("--s-interval", default="0.2:1.4")
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=10)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args()
    cfg = SlopeConfig(args.k, args.n, [float(x) for x in args.r_values.split(",")],
                      tuple(float(x) for x in args.s_interval.split(":")), args.trials,
                      args.seed, args.workers)

    start = time.perf_counter()
    ests = []
    for r in cfg.r_values:
        e = estimate_crossing(cfg.k, cfg.n, "r", r, cfg.s_interval, cfg.trials, seed=cfg.seed,
                              workers=cfg.workers)
        print(f"r={r:<5} crossing s={e.crossing:.4f}  [{e.ci_low:.3f}, {e.ci_high:.3f}]")
        ests.append(e)
    fit = fit_slope([(e.fixed_value, e.crossing) for e in ests], cfg.k, cfg.n)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        write_crossings_csv(ests, fh)
    bounds = None
    if cfg.k >= 3:
        bounds = {"lower_curve_slope": lower_slope(cfg.k), "upper_curve_slope": upper_slope(cfg.k)}
    write_manifest(str(args.out) + ".manifest.json", "slope_experiment", asdict(cfg), cfg.seed,
                   time.perf_counter() - start, {"slope_fit": asdict(fit), "bound_slopes": bounds})
    print(json.dumps({"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r_squared,
                      "slope_pinned": fit.slope_fixed_intercept, "bounds": bounds}, indent=2))


if __name__ == "__main__":
    main()
