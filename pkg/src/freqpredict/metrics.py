"""Frequency-error metrics.

Truth and estimate are paired by sorting both ascending and zipping; the
normalized error is relative to the truth's mean squared frequency.  dB
aggregation averages the linear values first and converts once.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DegenerateSignalError, ParameterError


def match_frequencies(
    truth: Sequence[float], estimate: Sequence[float]
) -> list[tuple[float, float]]:
    """Pair truth with estimate order-independently: sort both, zip."""
    t = np.asarray(truth, dtype=np.float64)
    e = np.asarray(estimate, dtype=np.float64)
    if t.ndim != 1 or e.ndim != 1:
        raise ParameterError("frequency lists must be 1-D")
    if t.size != e.size:
        raise ParameterError(
            f"cardinality mismatch: {t.size} truth vs {e.size} estimated"
        )
    if t.size == 0:
        raise ParameterError("empty frequency lists")
    return list(zip(np.sort(t).tolist(), np.sort(e).tolist()))


def nmse(truth: Sequence[float], estimate: Sequence[float]) -> float:
    """Mean squared pairing error over mean squared truth (linear scale)."""
    pairs = match_frequencies(truth, estimate)
    t = np.array([p[0] for p in pairs])
    e = np.array([p[1] for p in pairs])
    denom = float(np.dot(t, t))
    if denom == 0.0:
        raise DegenerateSignalError("NMSE undefined for all-zero truth")
    d = t - e
    return float(np.dot(d, d)) / denom


def nmse_db(values: Sequence[float]) -> float:
    """10*log10 of the mean of linear NMSE values.

    The mean is taken before the dB conversion.  An all-zero input has no
    finite dB value and is reported as -inf rather than raising.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ParameterError("nmse_db needs a non-empty 1-D sequence")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0):
        raise ParameterError("nmse values must be finite and >= 0")
    mean = float(np.mean(arr))
    if mean == 0.0:
        return float("-inf")
    return 10.0 * math.log10(mean)
