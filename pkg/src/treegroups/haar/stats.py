"""Binomial confidence intervals and the Pearson chi-square test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

CONFIDENCE = 0.99
ALPHA = 0.01
MIN_EXPECTED = 5
# below this many successes (or failures) the normal interval is replaced by Wilson's
WILSON_THRESHOLD = 10


def z_value(confidence: float = CONFIDENCE) -> float:
    return float(stats.norm.ppf(0.5 + confidence / 2))


@dataclass(frozen=True)
class Estimate:
    successes: int
    trials: int
    estimate: float
    lo: float
    hi: float
    method: str

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def covers(self, value) -> bool:
        return self.lo <= float(value) <= self.hi

    def to_dict(self) -> dict:
        return {
            "successes": self.successes,
            "trials": self.trials,
            "estimate": self.estimate,
            "ci_lo": self.lo,
            "ci_hi": self.hi,
            "method": self.method,
        }


def wilson_interval(k: int, n: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    z = z_value(confidence)
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # the exact endpoints at k = 0 and k = n are 0 and 1; keep rounding from excluding them
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


def normal_interval(k: int, n: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    z = z_value(confidence)
    p = k / n
    half = z * math.sqrt(p * (1 - p) / n)
    return max(0.0, p - half), min(1.0, p + half)


def proportion(k: int, n: int, confidence: float = CONFIDENCE) -> Estimate:
    if n <= 0:
        raise ValueError("need at least one trial")
    if min(k, n - k) < WILSON_THRESHOLD:
        lo, hi = wilson_interval(k, n, confidence)
        method = "wilson"
    else:
        lo, hi = normal_interval(k, n, confidence)
        method = "normal"
    return Estimate(int(k), int(n), k / n, lo, hi, method)


def pearson_chi_square(observed: np.ndarray, expected: float) -> tuple[float, int, float]:
    """Statistic, degrees of freedom and p-value against a flat expectation."""
    observed = np.asarray(observed, dtype=np.float64)
    stat = float(((observed - expected) ** 2).sum() / expected)
    df = observed.size - 1
    return stat, df, float(stats.chi2.sf(stat, df))
