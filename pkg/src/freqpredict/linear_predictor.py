"""Classical linear prediction: fit an autoregression, extrapolate forward.

A noiseless mixture of L real sinusoids satisfies an exact order-2L
recurrence, so the fitted coefficients continue such a window perfectly;
on noisy data the recursion drifts and the error grows with horizon.
Characteristic roots are deliberately left where the fit puts them --
no unit-circle projection unless explicitly requested.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateFitError, ParameterError
from .signal_core import Provenance, SampleWindow


@dataclass(frozen=True)
class LPModel:
    """Forward-prediction coefficients c_1..c_order plus fit diagnostics."""

    coeffs: np.ndarray
    residual: float
    rank: int

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.coeffs))
        if arr.ndim != 1 or arr.size < 1:
            raise ParameterError("coefficients must be a non-empty 1-D array")
        object.__setattr__(self, "coeffs", arr)

    @property
    def order(self) -> int:
        return int(self.coeffs.size)


def analytic_coefficients(frequencies: Sequence[float]) -> np.ndarray:
    """Exact order-2L recurrence coefficients for a real sinusoid mixture.

    Built from the characteristic polynomial with roots e^{+-j 2 pi f}:
    x(n) = sum_k c_k x(n-k) holds exactly for any amplitudes and phases.
    """
    freqs = np.asarray(frequencies, dtype=np.float64)
    if freqs.ndim != 1 or freqs.size == 0:
        raise ParameterError("need at least one frequency")
    roots = np.exp(2j * np.pi * np.concatenate([freqs, -freqs]))
    poly = np.real(np.poly(roots))
    return -poly[1:]


def fit_lp(window: SampleWindow, order: int) -> LPModel:
    """Least-squares fit of x(n) = sum_{k=1..order} c_k x(n-k).

    Uses every available equation (n from order+1 to the window end).  A
    rank-deficient but consistent system takes the minimum-norm solution,
    which still reproduces the window; only a zero-rank system (all-zero
    window) has nothing to predict from.
    """
    order = int(order)
    if order < 1:
        raise ParameterError(f"order must be >= 1, got {order}")
    x = window.as_array()
    if x.size < 2 * order:
        raise ParameterError(
            f"need at least {2 * order} samples to fit order {order}, "
            f"got {x.size}"
        )
    rows = np.arange(order, x.size)
    cols = np.arange(1, order + 1)
    a_mat = x[rows[:, None] - cols[None, :]]
    rhs = x[rows]
    coeffs, res, rank, _ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    if rank == 0:
        raise DegenerateFitError("window carries no signal to fit")
    if res.size:
        residual = float(np.real(res[0]))
    else:
        drop = rhs - a_mat @ coeffs
        residual = float(np.real(np.vdot(drop, drop)))
    return LPModel(coeffs=coeffs, residual=residual, rank=int(rank))


def _stabilized_coeffs(coeffs: np.ndarray) -> np.ndarray:
    poly = np.concatenate([[1.0], -np.asarray(coeffs)])
    roots = np.roots(poly)
    mags = np.abs(roots)
    roots = np.where(mags > 0, roots / np.where(mags > 0, mags, 1.0), roots)
    rebuilt = np.poly(roots)
    if not np.iscomplexobj(coeffs):
        rebuilt = np.real(rebuilt)
    return -rebuilt[1:]


def extrapolate(
    model: LPModel,
    window: SampleWindow,
    horizon: int,
    stabilize: bool = False,
) -> SampleWindow:
    """Run the recursion past the window end for ``horizon`` samples.

    stabilize=True first projects the characteristic roots onto the unit
    circle, trading fidelity on clean data for bounded growth on noisy data.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ParameterError(f"horizon must be >= 1, got {horizon}")
    x = window.as_array()
    if x.size < model.order:
        raise ParameterError(
            f"window of {x.size} samples cannot seed an order-{model.order} "
            "recursion"
        )
    coeffs = _stabilized_coeffs(model.coeffs) if stabilize else model.coeffs
    rev = np.asarray(coeffs)[::-1]
    buf = np.concatenate([x[-model.order :], np.zeros(horizon, dtype=rev.dtype)])
    for i in range(horizon):
        buf[model.order + i] = np.dot(rev, buf[i : i + model.order])
    out = buf[model.order :]
    if window.is_complex:
        return SampleWindow(
            np.real(out),
            start_index=window.start_index + len(window),
            provenance=Provenance.PREDICTED,
            samples_imag=np.imag(out),
        )
    return SampleWindow(
        np.real(out),
        start_index=window.start_index + len(window),
        provenance=Provenance.PREDICTED,
    )
