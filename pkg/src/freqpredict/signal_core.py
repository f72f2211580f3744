"""Sinusoid-mixture synthesis, SNR-calibrated noise, and window bookkeeping.

The sample model is x(n) = sum_l a_l sin(2 pi f_l n) for integer n starting
at 1, with normalized frequencies in (0, 0.5].  Windows remember their start
index and where their samples came from (measured vs predicted), which is
what keeps split/concat honest further up the pipeline.

Noise is drawn from numpy's PCG64 generator (standard_normal); that choice
is part of the reproducibility contract and is documented in the README.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ContiguityError,
    DegenerateSignalError,
    ParameterError,
    ShapeError,
)


class SignalModel(enum.Enum):
    REAL_SIN = "real-sin"
    COMPLEX_EXP = "complex-exp"


class Provenance(enum.Enum):
    TRUE = "true"
    PREDICTED = "predicted"
    CONCATENATED = "concatenated"


@dataclass(frozen=True)
class SinusoidSpec:
    """Ground-truth mixture: per-component amplitude and frequency.

    Frequencies are normalized (cycles per sample) and must lie in (0, 0.5].
    Amplitudes may be zero; the component then contributes nothing.
    """

    amplitudes: tuple[float, ...]
    frequencies: tuple[float, ...]

    def __post_init__(self):
        amps = tuple(float(a) for a in self.amplitudes)
        freqs = tuple(float(f) for f in self.frequencies)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "frequencies", freqs)
        if len(amps) != len(freqs):
            raise ParameterError(
                f"amplitude count {len(amps)} != frequency count {len(freqs)}"
            )
        if len(freqs) == 0:
            raise ParameterError("mixture needs at least one component")
        for a in amps:
            if not math.isfinite(a):
                raise ParameterError(f"non-finite amplitude {a}")
        for f in freqs:
            if not math.isfinite(f) or not 0.0 < f <= 0.5:
                raise ParameterError(f"frequency {f} outside (0, 0.5]")

    @property
    def count(self) -> int:
        return len(self.frequencies)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise, calibrated either by SNR or by sigma.

    Exactly one of snr_db / sigma must be given.  With snr_db the standard
    deviation is derived from the energy of the window the noise is added
    to, which is expected to be the clean signal.
    """

    snr_db: float | None = None
    sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if (self.snr_db is None) == (self.sigma is None):
            raise ParameterError("specify exactly one of snr_db or sigma")
        if self.sigma is not None and not (
            math.isfinite(self.sigma) and self.sigma >= 0.0
        ):
            raise ParameterError(f"sigma must be finite and >= 0, got {self.sigma}")
        if self.snr_db is not None and not math.isfinite(self.snr_db):
            raise ParameterError(f"snr_db must be finite, got {self.snr_db}")
        if int(self.seed) < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")


def _as_samples(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ShapeError(f"{name} must be a non-empty 1-D array")
    if not np.isfinite(arr).all():
        raise ParameterError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class SampleWindow:
    """A contiguous run of samples with its absolute start index.

    ``samples_imag`` is present only for the complex-exponential model; the
    two arrays are then the real and imaginary parts of the same sequence.
    """

    samples: np.ndarray
    start_index: int = 1
    provenance: Provenance = Provenance.TRUE
    samples_imag: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "samples", _as_samples(self.samples, "samples"))
        if self.samples_imag is not None:
            imag = _as_samples(self.samples_imag, "samples_imag")
            if imag.shape != self.samples.shape:
                raise ShapeError(
                    f"imaginary part length {imag.size} != real length "
                    f"{self.samples.size}"
                )
            object.__setattr__(self, "samples_imag", imag)
        if int(self.start_index) < 1:
            raise ParameterError(
                f"start_index must be >= 1, got {self.start_index}"
            )
        object.__setattr__(self, "start_index", int(self.start_index))
        if not isinstance(self.provenance, Provenance):
            raise ParameterError(f"bad provenance {self.provenance!r}")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def end_index(self) -> int:
        return self.start_index + len(self) - 1

    @property
    def is_complex(self) -> bool:
        return self.samples_imag is not None

    def as_array(self) -> np.ndarray:
        """Samples as a plain array: complex-valued when an imag part exists."""
        if self.samples_imag is None:
            return self.samples
        return self.samples + 1j * self.samples_imag

    def energy(self) -> float:
        e = float(np.dot(self.samples, self.samples))
        if self.samples_imag is not None:
            e += float(np.dot(self.samples_imag, self.samples_imag))
        return e


def synthesize(
    spec: SinusoidSpec,
    n_samples: int,
    model: SignalModel = SignalModel.REAL_SIN,
    start_index: int = 1,
) -> SampleWindow:
    """Generate the noiseless mixture over indices start..start+n_samples-1."""
    if int(n_samples) < 1:
        raise ParameterError(f"n_samples must be >= 1, got {n_samples}")
    if int(start_index) < 1:
        raise ParameterError(f"start_index must be >= 1, got {start_index}")
    n = np.arange(start_index, start_index + int(n_samples), dtype=np.float64)
    amps = np.asarray(spec.amplitudes)
    freqs = np.asarray(spec.frequencies)
    phase = 2.0 * np.pi * np.outer(n, freqs)
    sin_part = np.sin(phase)
    # sin(pi n) vanishes at every integer index; make the boundary component
    # exactly zero instead of leaving rounding noise at the 1e-16 level.
    sin_part[:, freqs == 0.5] = 0.0
    if model is SignalModel.REAL_SIN:
        return SampleWindow(sin_part @ amps, start_index=start_index)
    if model is SignalModel.COMPLEX_EXP:
        return SampleWindow(
            np.cos(phase) @ amps,
            start_index=start_index,
            samples_imag=sin_part @ amps,
        )
    raise ParameterError(f"unknown signal model {model!r}")


def add_noise(window: SampleWindow, noise: NoiseSpec) -> tuple[SampleWindow, float]:
    """Return (noisy window, sigma actually used).

    With snr_db calibration, sigma^2 = energy / (len * 10^(snr_db/10)) where
    the energy is taken from ``window`` itself, so the caller should pass the
    clean signal.  sigma == 0 returns the input window object unchanged.
    """
    if noise.sigma is not None:
        sigma = float(noise.sigma)
    else:
        energy = window.energy()
        if energy == 0.0:
            raise DegenerateSignalError(
                "SNR-calibrated noise undefined on an all-zero window"
            )
        sigma = math.sqrt(energy / (len(window) * 10.0 ** (noise.snr_db / 10.0)))
    if sigma == 0.0:
        return window, 0.0
    rng = np.random.Generator(np.random.PCG64(noise.seed))
    noisy = window.samples + sigma * rng.standard_normal(len(window))
    imag = None
    if window.samples_imag is not None:
        imag = window.samples_imag + sigma * rng.standard_normal(len(window))
    return (
        SampleWindow(
            noisy,
            start_index=window.start_index,
            provenance=window.provenance,
            samples_imag=imag,
        ),
        sigma,
    )


def split(window: SampleWindow, m: int) -> tuple[SampleWindow, SampleWindow]:
    """Split into the first m samples and the remainder, indices preserved."""
    m = int(m)
    if not 1 <= m < len(window):
        raise ParameterError(
            f"split point {m} outside [1, {len(window) - 1}] for a window "
            f"of {len(window)} samples"
        )

    def part(sl, start):
        return SampleWindow(
            window.samples[sl],
            start_index=start,
            provenance=window.provenance,
            samples_imag=None
            if window.samples_imag is None
            else window.samples_imag[sl],
        )

    head = part(slice(0, m), window.start_index)
    tail = part(slice(m, None), window.start_index + m)
    return head, tail


def concat(first: SampleWindow, second: SampleWindow) -> SampleWindow:
    """Join two windows that are contiguous in absolute index."""
    expected = first.start_index + len(first)
    if second.start_index != expected:
        raise ContiguityError(
            f"second window starts at {second.start_index}, expected {expected}"
        )
    if first.is_complex != second.is_complex:
        raise ShapeError("cannot concatenate complex with real windows")
    prov = (
        first.provenance
        if first.provenance is second.provenance
        else Provenance.CONCATENATED
    )
    imag = None
    if first.is_complex:
        imag = np.concatenate([first.samples_imag, second.samples_imag])
    return SampleWindow(
        np.concatenate([first.samples, second.samples]),
        start_index=first.start_index,
        provenance=prov,
        samples_imag=imag,
    )
