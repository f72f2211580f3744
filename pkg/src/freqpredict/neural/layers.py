"""Forward and backward passes for the three layer kinds.

Everything operates on batches: feature maps are (batch, channels, length)
and flat activations are (batch, features).  Convolutions are stride 1 with
same zero-padding and odd kernels; they are evaluated as batched matrix
products over an unrolled (channels*kernel, length) view, and the backward
pass folds the unrolled gradient back with the mirrored loop.
"""

from __future__ import annotations

import numpy as np

RELU = "relu"
LINEAR = "linear"


def _unroll(x_pad: np.ndarray, kernel: int, length: int) -> np.ndarray:
    """(B, C, T_pad) -> (B, C*kernel, T) with [b, c*K+k, t] = x_pad[b, c, t+k]."""
    view = np.lib.stride_tricks.sliding_window_view(x_pad, kernel, axis=2)
    b, c, t, k = view.shape
    assert t == length
    return view.transpose(0, 1, 3, 2).reshape(b, c * k, t)


def conv1d_forward(w: np.ndarray, b: np.ndarray, x: np.ndarray):
    """ReLU(same-padded convolution).  w is (filters, channels, kernel).

    Returns (y, cache); the cache carries what backward needs.
    """
    filters, channels, kernel = w.shape
    batch, _, length = x.shape
    pad = kernel // 2
    x_pad = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
    cols = _unroll(x_pad, kernel, length)
    pre = w.reshape(filters, channels * kernel) @ cols + b[None, :, None]
    mask = pre > 0.0
    return pre * mask, (cols, mask, pad, x.shape)


def conv1d_backward(w: np.ndarray, dy: np.ndarray, cache):
    cols, mask, pad, x_shape = cache
    filters, channels, kernel = w.shape
    batch, _, length = x_shape
    dpre = dy * mask
    w2 = w.reshape(filters, channels * kernel)
    dw = np.tensordot(dpre, cols, axes=([0, 2], [0, 2])).reshape(w.shape)
    db = dpre.sum(axis=(0, 2))
    dcols = np.matmul(w2.T, dpre)
    dcols = dcols.reshape(batch, channels, kernel, length)
    dx_pad = np.zeros((batch, channels, length + 2 * pad))
    for k in range(kernel):
        dx_pad[:, :, k : k + length] += dcols[:, :, k, :]
    dx = dx_pad[:, :, pad : pad + length] if pad else dx_pad
    return dx, dw, db


def dense_forward(w: np.ndarray, b: np.ndarray, x: np.ndarray, activation: str):
    """x (B, D) -> (B, units) through w (units, D) plus bias."""
    pre = x @ w.T + b[None, :]
    if activation == RELU:
        mask = pre > 0.0
        return pre * mask, (x, mask)
    return pre, (x, None)


def dense_backward(w: np.ndarray, dy: np.ndarray, cache):
    x, mask = cache
    dpre = dy * mask if mask is not None else dy
    dw = dpre.T @ x
    db = dpre.sum(axis=0)
    dx = dpre @ w
    return dx, dw, db


def flatten_forward(x: np.ndarray):
    return x.reshape(x.shape[0], -1), x.shape


def flatten_backward(dy: np.ndarray, cache):
    return dy.reshape(cache)
