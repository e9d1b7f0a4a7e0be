"""Desk-scale P(sat) grid over (r, s), the data behind a phase-diagram heat map.

    python scripts/phase_grid.py --k 3 --n 50 --out results/grid_k3.csv

Writes the scan CSV plus ``<out>.manifest.json``. Rerunning with the same
flags reproduces the CSV byte for byte.
"""
from __future__ import annotations

import argparse
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from cnfxor.lab import GridSpec, scan, write_manifest, write_scan_csv
from cnfxor.solver import SolveBudget

# r ranges roughly cover each k's satisfiable-to-unsatisfiable sweep at s = 0
R_MAX = {2: 2.0, 3: 6.0, 4: 12.0}


@dataclass
class GridConfig:
    k: int = 3
    n: int = 50
    r_step: float = 0.25
    s_step: float = 0.05
    s_max: float = 1.2
    trials: int = 25
    max_conflicts: int = 200_000
    seed: int = 0
    workers: int = 4

    def spec(self) -> GridSpec:
        r_max = R_MAX.get(self.k, 2.0 ** self.k * 0.7)
        r_vals = np.round(np.arange(0, r_max + 1e-9, self.r_step), 10)
        s_vals = np.round(np.arange(0, self.s_max + 1e-9, self.s_step), 10)
        return GridSpec(self.k, self.n, tuple(r_vals), tuple(s_vals), self.trials,
                        SolveBudget(max_conflicts=self.max_conflicts), self.seed)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    defaults = GridConfig()
    for name, value in asdict(defaults).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(value), default=value)
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args()
    cfg = GridConfig(**{k: getattr(args, k) for k in asdict(defaults)})

    spec = cfg.spec()
    start = time.perf_counter()
    result = scan(spec, workers=cfg.workers)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        write_scan_csv(result, fh)
    flagged = sum(c.flagged for c in result.cells.values())
    write_manifest(str(args.out) + ".manifest.json", "phase_grid", asdict(cfg), cfg.seed,
                   time.perf_counter() - start, {"grid": spec.to_dict(), "flagged_cells": flagged})
    print(f"{len(result.cells)} cells, {flagged} flagged, "
          f"{time.perf_counter() - start:.1f}s -> {args.out}")


if __name__ == "__main__":
    main()
