"""Weighted isotonic regression by pool-adjacent-violators.

The nondecreasing least-squares fit of y with positive weights w also
maximizes any exponential-family likelihood with mean parameter y and
weight w over nondecreasing vectors, which is what the current status
estimators need (binomial per-point likelihoods).
"""

from __future__ import annotations

import numpy as np

__all__ = ["isotonic_ratio", "weighted_isotonic"]


def isotonic_ratio(num, den) -> np.ndarray:
    """Nondecreasing fit of num/den under weights den.

    Block means are kept as (sum num) / (sum den), so for integer inputs all
    pooling decisions are exact and the fitted values are correctly rounded
    ratios of integer sums.  Adjacent blocks with equal means are pooled.
    """
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if num.ndim != 1 or num.shape != den.shape:
        raise ValueError("num and den must be 1-D arrays of equal length")
    if np.any(den <= 0):
        raise ValueError("weights must be positive")
    m = num.shape[0]
    # parallel stacks of block aggregates
    bnum = np.empty(m)
    bden = np.empty(m)
    size = np.empty(m, dtype=np.int64)
    top = -1
    for i in range(m):
        top += 1
        bnum[top] = num[i]
        bden[top] = den[i]
        size[top] = 1
        # pool while the previous block mean >= current block mean
        while top > 0 and bnum[top - 1] * bden[top] >= bnum[top] * bden[top - 1]:
            bnum[top - 1] += bnum[top]
            bden[top - 1] += bden[top]
            size[top - 1] += size[top]
            top -= 1
    return np.repeat(bnum[: top + 1] / bden[: top + 1], size[: top + 1])


def weighted_isotonic(y, w) -> np.ndarray:
    """Weighted least-squares isotonic (nondecreasing) regression of y."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    return isotonic_ratio(y * w, w)
