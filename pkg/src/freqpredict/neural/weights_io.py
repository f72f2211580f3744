"""Self-describing binary weight files.

Layout (all little-endian):

    bytes 0..7    magic b"PREDW001"
    bytes 8..11   uint32 header length H
    bytes 12..    UTF-8 JSON header of H bytes
    remainder     float64 arrays, C order, one after another in layer
                  declaration order (weight then bias per layer)

The header records format_version, the architecture descriptor, the init
seed, and the window dimensions, so a file fully determines the array
shapes that follow it.  Round trips are bitwise exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .network import (
    ArchitectureSpec,
    Conv1DSpec,
    DenseSpec,
    FlattenSpec,
    PredictorParams,
    param_shapes,
)

MAGIC = b"PREDW001"
FORMAT_VERSION = 1


def arch_to_dict(arch: ArchitectureSpec) -> dict:
    layers = []
    for spec in arch.layers:
        if isinstance(spec, Conv1DSpec):
            layers.append(
                {"type": "conv1d", "filters": spec.filters, "kernel": spec.kernel}
            )
        elif isinstance(spec, FlattenSpec):
            layers.append({"type": "flatten"})
        else:
            layers.append(
                {"type": "dense", "units": spec.units, "activation": spec.activation}
            )
    return {
        "layers": layers,
        "input_len": arch.input_len,
        "output_len": arch.output_len,
        "standardize_input": arch.standardize_input,
        "rescale_output": arch.rescale_output,
    }


def arch_from_dict(data: dict) -> ArchitectureSpec:
    try:
        layers = []
        for item in data["layers"]:
            kind = item["type"]
            if kind == "conv1d":
                layers.append(Conv1DSpec(int(item["filters"]), int(item["kernel"])))
            elif kind == "flatten":
                layers.append(FlattenSpec())
            elif kind == "dense":
                layers.append(
                    DenseSpec(int(item["units"]), str(item["activation"]))
                )
            else:
                raise FormatError(f"unknown layer type {kind!r}")
        return ArchitectureSpec(
            layers=tuple(layers),
            input_len=int(data["input_len"]),
            output_len=int(data["output_len"]),
            standardize_input=bool(data.get("standardize_input", False)),
            rescale_output=bool(data.get("rescale_output", False)),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed architecture descriptor: {exc}") from exc


def save_params(params: PredictorParams, path) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "architecture": arch_to_dict(params.arch),
        "init_seed": params.init_seed,
        "m": params.arch.m,
        "n": params.arch.n,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for group in params.layer_params:
            for arr in group:
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_params(path) -> PredictorParams:
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 4 or raw[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: not a weight file (bad magic)")
    (hlen,) = struct.unpack("<I", raw[len(MAGIC) : len(MAGIC) + 4])
    body = len(MAGIC) + 4
    if len(raw) < body + hlen:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[body : body + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable header: {exc}") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise FormatError(
            f"{path}: format version {header.get('format_version')!r}, "
            f"expected {FORMAT_VERSION}"
        )
    arch = arch_from_dict(header.get("architecture", {}))
    shapes = param_shapes(arch)
    offset = body + hlen
    groups = []
    for layer_shapes in shapes:
        arrs = []
        for shape in layer_shapes:
            count = int(np.prod(shape))
            nbytes = count * 8
            if offset + nbytes > len(raw):
                raise FormatError(
                    f"{path}: truncated arrays (need {nbytes} more bytes "
                    f"for shape {shape})"
                )
            arrs.append(
                np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
                .astype(np.float64)
                .reshape(shape)
            )
            offset += nbytes
        groups.append(tuple(arrs))
    if offset != len(raw):
        raise FormatError(
            f"{path}: {len(raw) - offset} trailing bytes after arrays"
        )
    return PredictorParams(
        arch=arch,
        layer_params=tuple(groups),
        init_seed=int(header.get("init_seed", 0)),
    )
