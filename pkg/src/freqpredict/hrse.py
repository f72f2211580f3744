"""High-resolution sinusoid frequency estimators.

Three routes to the same answer: subspace rotation on a Hankel matrix
(esprit_estimate), linear-prediction polynomial rooting (prony_estimate),
and a zero-padded periodogram with parabolic peak refinement
(periodogram_estimate).  All return frequencies sorted ascending in
(0, 0.5].

For the real sin model every frequency shows up as a conjugate pair of
unit-circle roots, so the underlying model order is 2l and pairs are
collapsed afterwards; complex-exponential windows carry one root per
component and skip the collapse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    NumericalDegeneracyError,
    ParameterError,
    UnderResolutionError,
)
from .signal_core import SampleWindow

# Conjugate pairs from a real system match exactly; the default tolerance
# (in cycles) only trips when noise pushes roots onto the real axis in an
# unpaired pattern, which is a genuine degeneracy.
PAIR_TOL_CYCLES = 1e-2


@dataclass(frozen=True)
class HankelConfig:
    """Hankel geometry for the subspace estimator.

    rows is the matrix height W; model_order is the number of complex
    exponentials the signal subspace must hold (2l real / l complex).
    """

    rows: int
    model_order: int

    def __post_init__(self):
        if int(self.rows) < 1 or int(self.model_order) < 1:
            raise ParameterError("rows and model_order must be positive")
        if self.rows < self.model_order:
            raise ParameterError(
                f"rows {self.rows} < model order {self.model_order}"
            )


@dataclass(frozen=True)
class FrequencyEstimate:
    frequencies: tuple[float, ...]
    method_tag: str

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.frequencies)
        object.__setattr__(self, "frequencies", freqs)
        if len(freqs) == 0:
            raise ParameterError("estimate must contain at least one frequency")
        for f in freqs:
            if not math.isfinite(f) or not 0.0 < f <= 0.5:
                raise ParameterError(f"estimated frequency {f} outside (0, 0.5]")
        if any(b < a for a, b in zip(freqs, freqs[1:])):
            raise ParameterError("estimated frequencies must be sorted ascending")


def default_hankel_rows(n: int, order: int) -> int:
    """floor(n/2) clamped into [order+1, n-order].

    order is the subspace dimension (2l for real windows), so the real-model
    clamp reads [2l+1, n-2l].
    """
    lo, hi = order + 1, n - order
    if lo > hi:
        raise ParameterError(f"window of {n} samples too short for order {order}")
    return min(max(n // 2, lo), hi)


def _hankel(x: np.ndarray, rows: int) -> np.ndarray:
    cols = x.size - rows + 1
    idx = np.arange(rows)[:, None] + np.arange(cols)[None, :]
    return x[idx]


def _model_signal(window: SampleWindow) -> tuple[np.ndarray, int]:
    """Return (sample array, roots per mixture component)."""
    if window.is_complex:
        return window.as_array(), 1
    return window.samples, 2


def _validate_order(l: int) -> int:
    l = int(l)
    if l < 1:
        raise ParameterError(f"component count must be >= 1, got {l}")
    return l


def _collapse_roots(
    roots: np.ndarray,
    l: int,
    roots_per_component: int,
    pair_tol: float,
    method_tag: str,
) -> FrequencyEstimate:
    """Turn unit-circle-ish roots into l frequencies in (0, 0.5].

    Real model: fold angles to |arg|/2pi, sort, merge consecutive pairs.
    A pair whose members disagree by more than pair_tol cycles has no
    conjugate structure left; a merged value at zero angle has no positive
    frequency to report.
    """
    folded = np.sort(np.abs(np.angle(roots)) / (2.0 * np.pi))
    if roots_per_component == 2:
        a, b = folded[0::2], folded[1::2]
        if np.any(b - a > pair_tol):
            raise NumericalDegeneracyError(
                "root angles do not form conjugate pairs "
                f"(worst gap {float(np.max(b - a)):.3g} cycles)"
            )
        freqs = (a + b) / 2.0
    else:
        freqs = folded
    if np.any(freqs <= 0.0):
        raise UnderResolutionError(
            f"{int(np.sum(freqs <= 0.0))} of {l} estimated frequencies "
            "collapsed to zero angle"
        )
    return FrequencyEstimate(tuple(np.sort(freqs).tolist()), method_tag)


def prony_estimate(
    window: SampleWindow, l: int, pair_tol: float = PAIR_TOL_CYCLES
) -> FrequencyEstimate:
    """Annihilating-filter estimate: LS linear prediction, then rooting.

    Fits the order-p forward predictor x(n) = sum_k c_k x(n-k) (p = 2l for
    real windows) and roots its characteristic polynomial.
    """
    l = _validate_order(l)
    x, per = _model_signal(window)
    p = per * l
    if x.size < 2 * p:
        raise ParameterError(
            f"need at least {2 * p} samples for order {p}, got {x.size}"
        )
    cols = np.arange(1, p + 1)
    rows = np.arange(p, x.size)
    a_mat = x[rows[:, None] - cols[None, :]]
    rhs = x[rows]
    coeffs, _, rank, _ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    if rank < p:
        raise NumericalDegeneracyError(
            f"prediction system rank {rank} below order {p}; "
            "fewer modes present than requested"
        )
    poly = np.concatenate([[1.0], -coeffs])
    roots = np.roots(poly)
    return _collapse_roots(roots, l, per, pair_tol, "prony")


def esprit_estimate(
    window: SampleWindow,
    l: int,
    cfg: HankelConfig | None = None,
    pair_tol: float = PAIR_TOL_CYCLES,
) -> FrequencyEstimate:
    """Subspace rotational-invariance estimate.

    SVD of the Hankel matrix, signal subspace = leading left singular
    vectors, LS solve between its first and last W-1 rows, eigenangles of
    the solution give the frequencies.
    """
    l = _validate_order(l)
    x, per = _model_signal(window)
    p = per * l
    if x.size < 2 * p + 1:
        raise ParameterError(
            f"need at least {2 * p + 1} samples for l={l}, got {x.size}"
        )
    if cfg is None:
        cfg = HankelConfig(rows=default_hankel_rows(x.size, p), model_order=p)
    if cfg.model_order != p:
        raise ParameterError(
            f"config model order {cfg.model_order} != required {p}"
        )
    w = cfg.rows
    cols = x.size - w + 1
    if w < p + 1 or cols < p:
        raise ParameterError(
            f"Hankel shape {w}x{cols} cannot hold a rank-{p} signal subspace "
            "with a row shift"
        )
    h = _hankel(x, w)
    u, _, _ = np.linalg.svd(h, full_matrices=False)
    u_sig = u[:, :p]
    shift, _, _, _ = np.linalg.lstsq(u_sig[:-1], u_sig[1:], rcond=None)
    eigvals = np.linalg.eigvals(shift)
    return _collapse_roots(eigvals, l, per, pair_tol, "esprit")


def periodogram_estimate(
    window: SampleWindow,
    l: int,
    grid_size: int = 4096,
    min_rel_power: float = 0.1,
) -> FrequencyEstimate:
    """Peak-picked zero-padded periodogram with parabolic refinement.

    grid_size counts frequency bins over (0, 0.5].  Local maxima below
    min_rel_power of the strongest peak are ignored as sidelobe or noise
    structure; if fewer than l remain the peaks are merged beyond what the
    grid can separate.
    """
    l = _validate_order(l)
    grid_size = int(grid_size)
    if grid_size < len(window):
        raise ParameterError(
            f"grid_size {grid_size} below window length {len(window)}"
        )
    if not 0.0 < min_rel_power < 1.0:
        raise ParameterError("min_rel_power must be in (0, 1)")
    x = window.as_array()
    nfft = 2 * grid_size
    spectrum = np.fft.fft(x, n=nfft)
    power = np.abs(spectrum[: grid_size + 1]) ** 2  # bins 0 .. 0.5 inclusive

    # Local maxima over bins 1..grid_size; out-of-range neighbors count as -inf.
    padded = np.concatenate([[-np.inf], power, [-np.inf]])
    inner = padded[1:-1]
    is_max = (inner > padded[:-2]) & (inner >= padded[2:])
    is_max[0] = False  # DC is outside (0, 0.5]
    candidates = np.flatnonzero(is_max)
    if candidates.size == 0:
        raise UnderResolutionError("no spectral peaks found")
    floor = min_rel_power * float(power[candidates].max())
    candidates = candidates[power[candidates] >= floor]
    if candidates.size < l:
        raise UnderResolutionError(
            f"only {candidates.size} separable peaks for l={l}"
        )
    top = candidates[np.argsort(power[candidates])[::-1][:l]]

    freqs = []
    for k in top:
        if 1 <= k < grid_size and power[k - 1] > 0 and power[k + 1] > 0:
            lm, lc, lp = np.log(power[k - 1]), np.log(power[k]), np.log(power[k + 1])
            denom = lm - 2.0 * lc + lp
            delta = 0.0 if denom == 0.0 else 0.5 * (lm - lp) / denom
            delta = float(np.clip(delta, -0.5, 0.5))
        else:
            delta = 0.0
        f = (k + delta) / nfft
        freqs.append(min(max(f, 1.0 / (2 * nfft)), 0.5))
    return FrequencyEstimate(tuple(sorted(freqs)), "periodogram")


ESTIMATORS = {
    "esprit": esprit_estimate,
    "prony": prony_estimate,
    "periodogram": periodogram_estimate,
}
