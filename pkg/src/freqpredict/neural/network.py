"""Sample-continuation network: architecture, parameters, forward, gradients.

The network maps the first m samples of a window to the remaining n - m.
Architectures are declarative layer stacks validated at construction; the
compiled shape chain drives parameter initialization and both passes.

The desk-scale default replaces per-batch normalization with fixed
per-example input standardization (mean removed, unit variance); the
inverse rescaling of the output exists behind a flag and stays off unless
asked for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ..errors import NumericError, ParameterError, ShapeError
from ..signal_core import Provenance, SampleWindow
from . import layers as ly

_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Conv1DSpec:
    """Stride-1, same-padded, ReLU convolution with an odd kernel."""

    filters: int
    kernel: int

    def __post_init__(self):
        if int(self.filters) < 1:
            raise ParameterError(f"filters must be >= 1, got {self.filters}")
        if int(self.kernel) < 1 or int(self.kernel) % 2 == 0:
            raise ParameterError(
                f"kernel must be odd and >= 1, got {self.kernel}"
            )


@dataclass(frozen=True)
class FlattenSpec:
    pass


@dataclass(frozen=True)
class DenseSpec:
    units: int
    activation: str = ly.RELU

    def __post_init__(self):
        if int(self.units) < 1:
            raise ParameterError(f"units must be >= 1, got {self.units}")
        if self.activation not in (ly.RELU, ly.LINEAR):
            raise ParameterError(f"unknown activation {self.activation!r}")


LayerSpec = Union[Conv1DSpec, FlattenSpec, DenseSpec]


@dataclass(frozen=True)
class ArchitectureSpec:
    """Layer stack plus input/output lengths and preprocessing switches."""

    layers: tuple[LayerSpec, ...]
    input_len: int
    output_len: int
    standardize_input: bool = False
    rescale_output: bool = False

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if int(self.input_len) < 1 or int(self.output_len) < 1:
            raise ParameterError("input_len and output_len must be >= 1")
        if self.rescale_output and not self.standardize_input:
            raise ParameterError(
                "rescale_output needs standardize_input to define the scale"
            )
        shape_chain(self)  # construction-time validation

    @property
    def m(self) -> int:
        return int(self.input_len)

    @property
    def n(self) -> int:
        return int(self.input_len) + int(self.output_len)


def shape_chain(arch: ArchitectureSpec) -> list[tuple]:
    """Per-layer output shapes: ('map', C, T) or ('flat', D).

    The first convolution lifts the flat input to a single-channel map;
    anywhere else a convolution needs an unflattened predecessor.
    """
    if not arch.layers:
        raise ShapeError("architecture needs at least one layer")
    state = ("flat", int(arch.input_len))
    chain = []
    for i, spec in enumerate(arch.layers):
        if isinstance(spec, Conv1DSpec):
            if state[0] == "flat":
                if i != 0:
                    raise ShapeError(
                        f"layer {i}: convolution after a flat layer"
                    )
                state = ("map", 1, state[1])
            state = ("map", int(spec.filters), state[2])
        elif isinstance(spec, FlattenSpec):
            if state[0] != "map":
                raise ShapeError(f"layer {i}: nothing to flatten")
            state = ("flat", state[1] * state[2])
        elif isinstance(spec, DenseSpec):
            if state[0] != "flat":
                raise ShapeError(
                    f"layer {i}: dense layer needs flattened input"
                )
            state = ("flat", int(spec.units))
        else:
            raise ParameterError(f"unknown layer spec {spec!r}")
        chain.append(state)
    last_spec = arch.layers[-1]
    if not isinstance(last_spec, DenseSpec) or last_spec.activation != ly.LINEAR:
        raise ShapeError("final layer must be a linear dense layer")
    if chain[-1] != ("flat", int(arch.output_len)):
        raise ShapeError(
            f"final layer produces {chain[-1]}, expected "
            f"('flat', {arch.output_len})"
        )
    return chain


def default_architecture(
    input_len: int, output_len: int
) -> ArchitectureSpec:
    """Desk-scale continuation net: two small convolutions, one readout."""
    return ArchitectureSpec(
        layers=(
            Conv1DSpec(32, 5),
            Conv1DSpec(64, 7),
            FlattenSpec(),
            DenseSpec(output_len, ly.LINEAR),
        ),
        input_len=input_len,
        output_len=output_len,
        standardize_input=True,
    )


def wide_architecture(input_len: int, output_len: int) -> ArchitectureSpec:
    """Full-width five-convolution stack; only sensible for long runs."""
    return ArchitectureSpec(
        layers=(
            Conv1DSpec(32, 5),
            Conv1DSpec(64, 7),
            Conv1DSpec(128, 11),
            Conv1DSpec(256, 13),
            Conv1DSpec(512, 15),
            FlattenSpec(),
            DenseSpec(output_len, ly.LINEAR),
        ),
        input_len=input_len,
        output_len=output_len,
        standardize_input=True,
    )


@dataclass
class PredictorParams:
    """Trainable arrays for one architecture, aligned with its layer list."""

    arch: ArchitectureSpec
    layer_params: tuple[tuple[np.ndarray, ...], ...]
    init_seed: int = 0

    def __post_init__(self):
        expected = param_shapes(self.arch)
        if len(self.layer_params) != len(expected):
            raise ShapeError(
                f"{len(self.layer_params)} parameter groups for "
                f"{len(expected)} layers"
            )
        groups = []
        for i, (arrs, shapes) in enumerate(zip(self.layer_params, expected)):
            arrs = tuple(np.asarray(a, dtype=np.float64) for a in arrs)
            got = tuple(a.shape for a in arrs)
            if got != shapes:
                raise ShapeError(
                    f"layer {i}: parameter shapes {got}, expected {shapes}"
                )
            for a in arrs:
                if not np.all(np.isfinite(a)):
                    raise NumericError(f"layer {i}: non-finite parameters")
            groups.append(arrs)
        self.layer_params = tuple(groups)

    def copy(self) -> "PredictorParams":
        return PredictorParams(
            arch=self.arch,
            layer_params=tuple(
                tuple(a.copy() for a in group) for group in self.layer_params
            ),
            init_seed=self.init_seed,
        )


def param_shapes(arch: ArchitectureSpec) -> list[tuple[tuple[int, ...], ...]]:
    """Expected (weight, bias) shapes per layer; empty tuple for Flatten."""
    chain = shape_chain(arch)
    shapes = []
    prev = ("flat", int(arch.input_len))
    for i, spec in enumerate(arch.layers):
        if isinstance(spec, Conv1DSpec):
            in_ch = 1 if prev[0] == "flat" else prev[1]
            shapes.append(((spec.filters, in_ch, spec.kernel), (spec.filters,)))
        elif isinstance(spec, DenseSpec):
            shapes.append(((spec.units, prev[1]), (spec.units,)))
        else:
            shapes.append(())
        prev = chain[i]
    return shapes


def init_params(arch: ArchitectureSpec, seed: int = 0) -> PredictorParams:
    """Scaled-normal fan-in init for ReLU layers, small uniform for linear."""
    rng = np.random.Generator(np.random.PCG64(seed))
    groups = []
    for spec, shapes in zip(arch.layers, param_shapes(arch)):
        if not shapes:
            groups.append(())
            continue
        w_shape, b_shape = shapes
        fan_in = int(np.prod(w_shape[1:]))
        relu = isinstance(spec, Conv1DSpec) or (
            isinstance(spec, DenseSpec) and spec.activation == ly.RELU
        )
        if relu:
            w = rng.standard_normal(w_shape) * math.sqrt(2.0 / fan_in)
        else:
            bound = 1.0 / math.sqrt(fan_in)
            w = rng.uniform(-bound, bound, size=w_shape)
        groups.append((w, np.zeros(b_shape)))
    return PredictorParams(arch=arch, layer_params=tuple(groups), init_seed=int(seed))


def _standardize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mu = x.mean(axis=1, keepdims=True)
    sd = np.maximum(x.std(axis=1, keepdims=True), _STD_FLOOR)
    return (x - mu) / sd, mu, sd


def _forward_cached(params: PredictorParams, x: np.ndarray):
    """Batched forward pass; returns (output, per-layer caches, scale info)."""
    arch = params.arch
    if x.ndim != 2 or x.shape[1] != arch.input_len:
        raise ShapeError(
            f"input shape {x.shape} incompatible with input_len "
            f"{arch.input_len}"
        )
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite values in network input")
    mu = sd = None
    if arch.standardize_input:
        x, mu, sd = _standardize(x)
    act = x
    caches = []
    for i, spec in enumerate(arch.layers):
        group = params.layer_params[i]
        if isinstance(spec, Conv1DSpec):
            if act.ndim == 2:
                act = act[:, None, :]
            act, cache = ly.conv1d_forward(group[0], group[1], act)
        elif isinstance(spec, FlattenSpec):
            act, cache = ly.flatten_forward(act)
        else:
            act, cache = ly.dense_forward(group[0], group[1], act, spec.activation)
        if not np.all(np.isfinite(act)):
            raise NumericError(f"non-finite activations after layer {i}")
        caches.append(cache)
    if arch.rescale_output:
        act = act * sd + mu
    return act, caches, (mu, sd)


def forward(params: PredictorParams, x) -> np.ndarray:
    """Map input samples to the predicted continuation.

    Accepts a single example (input_len,) or a batch (B, input_len) and
    returns matching dimensionality.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    out, _, _ = _forward_cached(params, arr)
    return out[0] if single else out


def loss_and_gradients(params: PredictorParams, batch):
    """Summed squared continuation error over a batch, with exact gradients.

    ``batch`` is either a sequence of (x_in, x_target) pairs or a pair of
    stacked arrays.  Returns (loss, grads) with grads shaped like
    ``params.layer_params``.
    """
    if isinstance(batch, tuple) and len(batch) == 2:
        x_in, x_tgt = batch
    else:
        pairs = list(batch)
        if not pairs:
            raise ParameterError("empty batch")
        x_in = np.stack([np.asarray(p[0], dtype=np.float64) for p in pairs])
        x_tgt = np.stack([np.asarray(p[1], dtype=np.float64) for p in pairs])
    x_in = np.asarray(x_in, dtype=np.float64)
    x_tgt = np.asarray(x_tgt, dtype=np.float64)
    if x_in.ndim != 2 or x_tgt.ndim != 2 or x_in.shape[0] != x_tgt.shape[0]:
        raise ShapeError(
            f"batch arrays {x_in.shape} / {x_tgt.shape} are not matching "
            "2-D stacks"
        )
    arch = params.arch
    if x_tgt.shape[1] != arch.output_len:
        raise ShapeError(
            f"target length {x_tgt.shape[1]} != output_len {arch.output_len}"
        )
    out, caches, (mu, sd) = _forward_cached(params, x_in)
    diff = out - x_tgt
    loss = float(np.sum(diff * diff))
    dact = 2.0 * diff
    if arch.rescale_output:
        dact = dact * sd
    grads: list[tuple[np.ndarray, ...]] = [()] * len(arch.layers)
    for i in range(len(arch.layers) - 1, -1, -1):
        spec = arch.layers[i]
        group = params.layer_params[i]
        if isinstance(spec, Conv1DSpec):
            dact, dw, db = ly.conv1d_backward(group[0], dact, caches[i])
            if i == 0:
                dact = dact[:, 0, :]
            grads[i] = (dw, db)
        elif isinstance(spec, FlattenSpec):
            dact = ly.flatten_backward(dact, caches[i])
        else:
            dact, dw, db = ly.dense_backward(group[0], dact, caches[i])
            grads[i] = (dw, db)
    return loss, tuple(grads)


def predict_window(params: PredictorParams, window: SampleWindow) -> SampleWindow:
    """Continue a measured window; the result is flagged as predicted."""
    if window.is_complex:
        raise ParameterError("predictor operates on real windows")
    if len(window) != params.arch.input_len:
        raise ShapeError(
            f"window length {len(window)} != predictor input_len "
            f"{params.arch.input_len}"
        )
    out = forward(params, window.samples)
    return SampleWindow(
        out,
        start_index=window.start_index + len(window),
        provenance=Provenance.PREDICTED,
    )
