"""Phase-transition experiments: grid scans, crossing search, slope fits."""
from __future__ import annotations

import csv
import json
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import __version__
from . import rng as rngmod
from .bounds import fmt
from .formula import InvalidParams, RandomModelParams, sample_formula
from .solver import SolveBudget, Verdict, solve
from .stats import wilson_interval

EXHAUSTED_CAP = 0.05

SCAN_HEADER = ["k", "n", "r", "s", "trials", "sat", "unsat", "exhausted", "p_sat"]
CROSSING_HEADER = ["k", "n", "axis", "fixed_value", "crossing", "ci_low", "ci_high", "trials_used"]


class NotBracketed(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class CensoredProbe(RuntimeError):
    """A crossing probe hit the solver budget too often to be trusted."""


@dataclass(frozen=True)
class GridSpec:
    k: int
    n: int
    r_values: tuple[float, ...]
    s_values: tuple[float, ...]
    trials_per_cell: int
    budget: SolveBudget = SolveBudget()
    master_seed: int = 0
    branching: str = "occurrence"

    def __post_init__(self):
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        object.__setattr__(self, "s_values", tuple(float(s) for s in self.s_values))
        if self.trials_per_cell < 1:
            raise InvalidParams("trials_per_cell must be >= 1")
        if any(v < 0 for v in self.r_values + self.s_values):
            raise InvalidParams("densities must be non-negative")
        if list(self.r_values) != sorted(self.r_values) or list(self.s_values) != sorted(self.s_values):
            raise InvalidParams("density lists must be sorted")
        RandomModelParams(self.k, self.n, 0.0, 0.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["r_values"] = list(self.r_values)
        d["s_values"] = list(self.s_values)
        return d


@dataclass
class CellCounts:
    sat: int = 0
    unsat: int = 0
    exhausted: int = 0

    @property
    def trials(self) -> int:
        return self.sat + self.unsat + self.exhausted

    @property
    def flagged(self) -> bool:
        return self.exhausted > EXHAUSTED_CAP * self.trials

    @property
    def p_sat(self) -> float | None:
        decided = self.sat + self.unsat
        if self.flagged or not decided:
            return None
        return self.sat / decided

    def add(self, verdict: Verdict) -> None:
        if verdict is Verdict.SAT:
            self.sat += 1
        elif verdict is Verdict.UNSAT:
            self.unsat += 1
        else:
            self.exhausted += 1


@dataclass
class ScanResult:
    spec: GridSpec
    cells: dict[tuple[int, int], CellCounts]

    def rows(self):
        for i, r in enumerate(self.spec.r_values):
            for j, s in enumerate(self.spec.s_values):
                yield r, s, self.cells[i, j]


def run_trial(k: int, n: int, r: float, s: float, seed: int, budget: SolveBudget,
              branching: str = "occurrence") -> Verdict:
    f = sample_formula(RandomModelParams(k, n, r, s), seed)
    return solve(f, budget, branching).verdict


def _run_batch(args) -> list[Verdict]:
    k, n, r, s, seeds, budget, branching = args
    return [run_trial(k, n, r, s, seed, budget, branching) for seed in seeds]


def _map_batches(batches: list, workers: int) -> list[list[Verdict]]:
    if workers <= 1 or len(batches) <= 1:
        return [_run_batch(b) for b in batches]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_batch, batches))


def cell_seed(master_seed: int, i: int, j: int, t: int) -> int:
    return rngmod.derive_seed(master_seed, rngmod.CELL, i, j, t)


def scan(spec: GridSpec, workers: int = 1) -> ScanResult:
    """Tally solver verdicts over every (r, s) cell of the grid.

    Trial t of cell (i, j) is seeded from (master_seed, i, j, t) alone, so
    the result does not depend on ``workers``.
    """
    keys = [(i, j) for i in range(len(spec.r_values)) for j in range(len(spec.s_values))]
    batches = [
        (spec.k, spec.n, spec.r_values[i], spec.s_values[j],
         [cell_seed(spec.master_seed, i, j, t) for t in range(spec.trials_per_cell)],
         spec.budget, spec.branching)
        for i, j in keys
    ]
    cells = {}
    for key, verdicts in zip(keys, _map_batches(batches, workers)):
        counts = CellCounts()
        for v in verdicts:
            counts.add(v)
        cells[key] = counts
    return ScanResult(spec, cells)


def write_scan_csv(result: ScanResult, sink: TextIO) -> None:
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    spec = result.spec
    for r, s, c in result.rows():
        p = c.p_sat
        w.writerow([spec.k, spec.n, fmt(r), fmt(s), c.trials, c.sat, c.unsat, c.exhausted,
                    "" if p is None else fmt(p)])


# -- crossing search ---------------------------------------------------------------


@dataclass
class Probe:
    density: float
    counts: CellCounts

    @property
    def p_sat(self) -> float | None:
        return self.counts.p_sat

    def wilson95(self) -> tuple[float, float]:
        return wilson_interval(self.counts.sat, self.counts.sat + self.counts.unsat)


@dataclass
class CrossingEstimate:
    k: int
    n: int
    axis: str
    fixed_value: float
    crossing: float
    ci_low: float
    ci_high: float
    trials_used: int
    exhausted: int = 0
    probes: list[Probe] = field(default_factory=list, repr=False)

    @property
    def exhausted_fraction(self) -> float:
        return self.exhausted / self.trials_used if self.trials_used else 0.0

    def row(self) -> list:
        return [self.k, self.n, self.axis, fmt(self.fixed_value), fmt(self.crossing),
                fmt(self.ci_low), fmt(self.ci_high), self.trials_used]


def _quantize(d: float) -> int:
    return int(round(d * 1e9))


def estimate_crossing(k: int, n: int, fixed_axis: str, fixed_value: float,
                      search_interval: tuple[float, float], trials_per_probe: int,
                      target: float = 0.5, seed: int = 0,
                      budget: SolveBudget | None = None, resolution: float = 0.01,
                      max_rounds: int = 4, workers: int = 1,
                      branching: str = "occurrence") -> CrossingEstimate:
    """Bisect the free density axis for the point where P(sat) = ``target``.

    ``fixed_axis`` names the density held constant ("r" or "s"); the search
    runs along the other one. Each midpoint gets ``trials_per_probe`` trials,
    topped up in further batches (at most ``max_rounds`` in all) while its
    95% Wilson interval still contains the target. Bisection stops once the
    bracket is no wider than ``resolution``.

    The reported interval runs from the highest probe confidently above the
    target to the lowest probe confidently below it, on either side of the
    estimate; interval ends stand in when no probe was confident.
    """
    if fixed_axis not in ("r", "s"):
        raise InvalidParams("fixed_axis must be 'r' or 's'")
    lo, hi = map(float, search_interval)
    if not lo < hi:
        raise InvalidParams("search interval must have lo < hi")
    budget = budget or SolveBudget()
    probes: dict[int, Probe] = {}

    def densities(d):
        return (fixed_value, d) if fixed_axis == "r" else (d, fixed_value)

    def run_round(d: float, rnd: int) -> None:
        q = _quantize(d)
        seeds = [rngmod.derive_seed(seed, rngmod.PROBE, q, rnd * trials_per_probe + t)
                 for t in range(trials_per_probe)]
        r, s = densities(d)
        # split across workers in contiguous chunks; tallies are order-free
        chunks = np.array_split(np.array(seeds, dtype=object), max(1, workers))
        batches = [(k, n, r, s, list(c), budget, branching) for c in chunks if len(c)]
        probe = probes.setdefault(q, Probe(d, CellCounts()))
        for verdicts in _map_batches(batches, workers):
            for v in verdicts:
                probe.counts.add(v)

    def probe_at(d: float) -> float:
        run_round(d, 0)
        p = probes[_quantize(d)]
        rnd = 1
        while rnd < max_rounds:
            w_lo, w_hi = p.wilson95()
            if p.counts.flagged or not (w_lo <= target <= w_hi):
                break
            run_round(d, rnd)
            rnd += 1
        if p.p_sat is None:
            raise CensoredProbe(
                f"probe at {fixed_axis}={fixed_value}, density {d}: "
                f"{p.counts.exhausted}/{p.counts.trials} trials exhausted the budget"
            )
        return p.p_sat

    p_lo, p_hi = probe_at(lo), probe_at(hi)
    if not (p_lo > target > p_hi):
        raise NotBracketed(
            f"P(sat) is {p_lo:.3g} at {lo} and {p_hi:.3g} at {hi}; target {target} not bracketed"
        )
    a, b = lo, hi
    while b - a > resolution:
        mid = 0.5 * (a + b)
        if probe_at(mid) > target:
            a = mid
        else:
            b = mid
    crossing = 0.5 * (a + b)

    ci_low, ci_high = lo, hi
    for p in probes.values():
        w_lo, w_hi = p.wilson95()
        if p.density <= crossing and w_lo > target:
            ci_low = max(ci_low, p.density)
        if p.density >= crossing and w_hi < target:
            ci_high = min(ci_high, p.density)
    used = sum(p.counts.trials for p in probes.values())
    exhausted = sum(p.counts.exhausted for p in probes.values())
    ordered = sorted(probes.values(), key=lambda p: p.density)
    return CrossingEstimate(k, n, fixed_axis, fixed_value, crossing, ci_low, ci_high,
                            used, exhausted, ordered)


def write_crossings_csv(estimates: Iterable[CrossingEstimate], sink: TextIO) -> None:
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(CROSSING_HEADER)
    for e in estimates:
        w.writerow(e.row())


# -- slope fit ----------------------------------------------------------------------


@dataclass
class SlopeFit:
    k: int | None
    n: int | None
    crossings: list[tuple[float, float]]
    slope: float
    intercept: float
    r_squared: float
    slope_fixed_intercept: float
    r_squared_fixed_intercept: float


def fit_slope(crossings: Sequence[tuple[float, float]], k: int | None = None,
              n: int | None = None) -> SlopeFit:
    """Least-squares line s = L r + c, plus the variant with c pinned to 1."""
    pts = [(float(r), float(s)) for r, s in crossings]
    if len({r for r, _ in pts}) < 3:
        raise InsufficientData("need crossings at three or more distinct r values")
    r = np.array([p[0] for p in pts])
    s = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(r, s, 1)
    ss_tot = float(((s - s.mean()) ** 2).sum())

    def r2(pred):
        ss_res = float(((s - pred) ** 2).sum())
        return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    fixed = float((r * (s - 1)).sum() / (r * r).sum())
    return SlopeFit(k, n, pts, float(slope), float(intercept), r2(slope * r + intercept),
                    fixed, r2(fixed * r + 1))


# -- manifests -------------------------------------------------------------------------


def write_manifest(path, command: str, config: dict, master_seed: int | None,
                   wall_time: float, extra: dict | None = None) -> dict:
    manifest = {
        "command": command,
        "config": config,
        "master_seed": master_seed,
        "software": {"package": "cnfxor", "version": __version__, "rng": rngmod.RNG_SCHEME,
                     "python": platform.python_version()},
        "wall_time": wall_time,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, default=_json_default)
        fh.write("\n")
    return manifest


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    if isinstance(obj, float) and math.isnan(obj):
        return None
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")
