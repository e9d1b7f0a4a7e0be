"""Binomial confidence machinery shared by the experiments and verifiers."""
from __future__ import annotations

from math import sqrt
from statistics import NormalDist


def z_value(confidence: float, one_sided: bool = False) -> float:
    tail = 1 - confidence if one_sided else (1 - confidence) / 2
    return NormalDist().inv_cdf(1 - tail)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95,
                    one_sided: bool = False) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    With ``one_sided=True`` each endpoint is a one-sided bound at the given
    confidence (z from the single tail).
    """
    if trials <= 0:
        return 0.0, 1.0
    z = z_value(confidence, one_sided)
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z / denom * sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)
