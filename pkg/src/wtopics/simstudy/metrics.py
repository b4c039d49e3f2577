"""Accuracy metrics across replicates."""

import numpy as np

from ..errors import InvalidInterval


def rmse(estimates, truth: float) -> float:
    """sqrt(mean((estimate - truth)^2)) over replicates."""
    est = np.asarray(estimates, dtype=np.float64)
    return float(np.sqrt(np.mean((est - truth) ** 2)))


def abs_bias(estimates, truth: float) -> float:
    """|mean(estimate) - truth|."""
    return float(abs(np.mean(np.asarray(estimates, dtype=np.float64)) - truth))


def interval_score(lo, hi, truth: float, alpha: float = 0.05) -> float:
    """
    Interval score (u - l) + 2/alpha (l - x) 1[x < l] + 2/alpha (x - u) 1[x > u].

    Vector inputs are scored per replicate and averaged. A truth equal to an
    endpoint counts as covered.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if np.any(lo > hi):
        raise InvalidInterval("Interval lower bound exceeds the upper bound")
    below = np.where(truth < lo, lo - truth, 0.0)
    above = np.where(truth > hi, truth - hi, 0.0)
    return float(np.mean((hi - lo) + (2.0 / alpha) * (below + above)))
