"""Closed-form bounds on the k-CNF-XOR satisfiability threshold.

For k-clause density r, a random formula is satisfiable w.h.p. below
``s_lower(k, r) = 1/2 * log2(Lambda(k, r))`` (for r under a validity cap)
and unsatisfiable w.h.p. above ``s_upper(k, r) = 1 + r * log2(1 - 2^-k)``.
Both curves are affine in r and meet at s = 1 when r = 0.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .formula import InvalidParams


class OutOfValidity(ValueError):
    pass


def beta(k: int) -> float:
    """Smallest positive root of ``b * (2 - b)**(k - 1) = 1``, by bisection.

    On (0, 2/k] the left side is strictly increasing, so the bracket
    (0, 2/k] always holds exactly one root.
    """
    if k < 3:
        raise InvalidParams(f"beta needs k >= 3, got {k}")
    lo, hi = 0.0, 2.0 / k
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mid * (2 - mid) ** (k - 1) < 1:
            lo = mid
        else:
            hi = mid
    # pick whichever endpoint has the smaller residual
    return min((lo, hi), key=lambda b: abs(b * (2 - b) ** (k - 1) - 1))


def beta_residual(k: int) -> float:
    b = beta(k)
    return abs(b * (2 - b) ** (k - 1) - 1)


def log_inner_ratio(k: int) -> float:
    """Natural log of ``((1 - b/2)^k - 2^-k)^2 / (1 - b)^k``, with b = beta(k)."""
    b = beta(k)
    # (1 - b/2)^k - 2^-k = 1 + expm1(k log1p(-b/2)) - 2^-k
    a = math.log1p(math.expm1(k * math.log1p(-b / 2)) - 2.0 ** -k)
    return 2 * a - k * math.log1p(-b)


def lambda_lower(k: int, r: float) -> float:
    if r < 0:
        raise InvalidParams("r must be non-negative")
    return 4 * math.exp(r * log_inner_ratio(k))


def r_validity_max(k: int) -> float:
    return 2 ** k * math.log(2) - 0.5 * ((k + 1) * math.log(2) + 3)


def lower_slope(k: int) -> float:
    return log_inner_ratio(k) / (2 * math.log(2))


def upper_slope(k: int) -> float:
    return math.log2(-math.expm1(math.log(2) * -k)) if k > 0 else float("nan")


def s_lower(k: int, r: float, extrapolate: bool = False) -> float:
    if r < 0:
        raise InvalidParams("r must be non-negative")
    if r >= r_validity_max(k) and not extrapolate:
        raise OutOfValidity(f"r={r} beyond the lower bound's validity limit {r_validity_max(k):.6g}")
    # 1/2 log2(4 * ratio^r) written so that r = 0 gives exactly 1
    return 1 + r * lower_slope(k)


def s_upper(k: int, r: float) -> float:
    if k < 2:
        raise InvalidParams(f"upper bound needs k >= 2, got {k}")
    if r < 0:
        raise InvalidParams("r must be non-negative")
    return 1 + r * math.log2(1 - 2.0 ** -k)


@dataclass
class BoundCurve:
    k: int
    beta_k: float
    r_validity_max: float
    # rows of (r, s_lower, s_upper, extrapolated)
    samples: list[tuple[float, float, float, bool]] = field(default_factory=list)

    def write_csv(self, sink: TextIO) -> None:
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(["r", "s_lower", "s_upper", "extrapolated"])
        for r, lo, hi, ext in self.samples:
            w.writerow([fmt(r), fmt(lo), fmt(hi), "true" if ext else "false"])


def fmt(x: float) -> str:
    return "%.12g" % x


def curve(k: int, r_grid: Iterable[float], extrapolate: bool = False) -> BoundCurve:
    """Sample both bound curves; rows past validity need ``extrapolate``."""
    grid = list(r_grid)
    if grid != sorted(grid):
        raise InvalidParams("r grid must be sorted")
    rmax = r_validity_max(k)
    out = BoundCurve(k, beta(k), rmax)
    for r in grid:
        ext = r >= rmax
        lo = s_lower(k, r, extrapolate=extrapolate)
        hi = s_upper(k, r)
        if not ext and lo > hi:
            raise AssertionError(f"sandwich violated at k={k}, r={r}: {lo} > {hi}")
        out.samples.append((r, lo, hi, ext))
    return out
