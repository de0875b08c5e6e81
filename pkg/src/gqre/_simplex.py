"""Euclidean projection onto scaled probability simplices (sort-based, exact)."""

from __future__ import annotations

import numpy as np


def project_simplex(v, mass: float = 1.0) -> np.ndarray:
    """Project v onto {q : q >= 0, sum(q) = mass} in Euclidean norm.

    Uses the sorted-threshold construction: the unique threshold tau with
    sum(max(v - tau, 0)) = mass is found exactly from the sorted cumulative
    sums, so no iterative tolerance is involved.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("project_simplex expects a non-empty 1-D array")
    if mass < 0:
        raise ValueError(f"mass must be nonnegative, got {mass}")
    if mass == 0.0:
        return np.zeros_like(v)
    srt = np.sort(v)[::-1]
    cum = np.cumsum(srt)
    j = np.arange(1, v.size + 1)
    thresholds = (cum - mass) / j
    # largest k with srt[k-1] > threshold[k-1]; k >= 1 always since mass > 0
    k = np.nonzero(srt > thresholds)[0][-1] + 1
    tau = thresholds[k - 1]
    return np.maximum(v - tau, 0.0)
