"""Minibatch Adam training for the continuation network.

The loss is the summed squared error of the batch; the optimizer steps on
the per-batch mean gradient.  Shuffling and initialization each have their
own seed, so a (init_seed, shuffle_seed) pair pins the whole run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import NumericError, ParameterError, TrainingDivergedError
from .network import ArchitectureSpec, PredictorParams, init_params, loss_and_gradients

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 50
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    init_seed: int = 0
    shuffle_seed: int = 0

    def __post_init__(self):
        if int(self.epochs) < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if int(self.batch_size) < 1:
            raise ParameterError(
                f"batch_size must be >= 1, got {self.batch_size}"
            )
        if not self.learning_rate > 0.0:
            raise ParameterError(
                f"learning_rate must be > 0, got {self.learning_rate}"
            )
        if not 0.0 <= self.adam_beta1 < 1.0 or not 0.0 <= self.adam_beta2 < 1.0:
            raise ParameterError("Adam betas must lie in [0, 1)")
        if not self.adam_eps > 0.0:
            raise ParameterError(f"adam_eps must be > 0, got {self.adam_eps}")


def _resolve_examples(dataset) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(dataset, "as_arrays"):
        x_in, x_tgt = dataset.as_arrays()
    else:
        x_in, x_tgt = dataset
    x_in = np.asarray(x_in, dtype=np.float64)
    x_tgt = np.asarray(x_tgt, dtype=np.float64)
    if x_in.ndim != 2 or x_tgt.ndim != 2 or len(x_in) != len(x_tgt):
        raise ParameterError("training data must be two matching 2-D stacks")
    if len(x_in) == 0:
        raise ParameterError("training data is empty")
    return x_in, x_tgt


def train(
    dataset,
    arch: ArchitectureSpec,
    cfg: TrainConfig = TrainConfig(),
) -> tuple[PredictorParams, list[float]]:
    """Fit the network; returns (params, per-epoch mean example loss).

    A non-finite loss aborts with TrainingDivergedError carrying the
    parameters from the last completed epoch.
    """
    x_in, x_tgt = _resolve_examples(dataset)
    if x_in.shape[1] != arch.input_len or x_tgt.shape[1] != arch.output_len:
        raise ParameterError(
            f"data dims ({x_in.shape[1]} -> {x_tgt.shape[1]}) do not match "
            f"architecture ({arch.input_len} -> {arch.output_len})"
        )
    params = init_params(arch, cfg.init_seed)
    m_state = [tuple(np.zeros_like(a) for a in g) for g in params.layer_params]
    v_state = [tuple(np.zeros_like(a) for a in g) for g in params.layer_params]
    step = 0
    rng = np.random.Generator(np.random.PCG64(cfg.shuffle_seed))
    n = len(x_in)
    history: list[float] = []
    last_good = params.copy()
    for epoch in range(cfg.epochs):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for lo in range(0, n, cfg.batch_size):
            idx = perm[lo : lo + cfg.batch_size]
            loss, grads = loss_and_gradients(params, (x_in[idx], x_tgt[idx]))
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss became non-finite at epoch {epoch}, "
                    f"batch {lo // cfg.batch_size}",
                    params=last_good,
                    history=history,
                )
            epoch_loss += loss
            step += 1
            scale = 1.0 / len(idx)
            bc1 = 1.0 - cfg.adam_beta1**step
            bc2 = 1.0 - cfg.adam_beta2**step
            new_groups = []
            for gi, group in enumerate(params.layer_params):
                new_arrs = []
                for ai, arr in enumerate(group):
                    g = grads[gi][ai] * scale
                    m = cfg.adam_beta1 * m_state[gi][ai] + (1 - cfg.adam_beta1) * g
                    v = cfg.adam_beta2 * v_state[gi][ai] + (1 - cfg.adam_beta2) * (
                        g * g
                    )
                    m_state[gi] = m_state[gi][:ai] + (m,) + m_state[gi][ai + 1 :]
                    v_state[gi] = v_state[gi][:ai] + (v,) + v_state[gi][ai + 1 :]
                    new_arrs.append(
                        arr
                        - cfg.learning_rate
                        * (m / bc1)
                        / (np.sqrt(v / bc2) + cfg.adam_eps)
                    )
                new_groups.append(tuple(new_arrs))
            try:
                params = PredictorParams(
                    arch=arch,
                    layer_params=tuple(new_groups),
                    init_seed=cfg.init_seed,
                )
            except NumericError:
                raise TrainingDivergedError(
                    f"parameters became non-finite at epoch {epoch}, "
                    f"batch {lo // cfg.batch_size}",
                    params=last_good,
                    history=history,
                ) from None
        history.append(epoch_loss / n)
        last_good = params.copy()
        log.debug("epoch %d: mean loss %.6g", epoch, history[-1])
    return params, history


def gradient_check(
    params: PredictorParams,
    batch,
    h: float = 1e-5,
) -> float:
    """Worst relative disagreement between backprop and central differences.

    Every parameter entry is perturbed by +-h; the relative error uses
    max(|analytic|, |numeric|, 1e-3) as its scale so near-zero entries are
    compared absolutely.
    """
    _, grads = loss_and_gradients(params, batch)

    def loss_only(p):
        l, _ = loss_and_gradients(p, batch)
        return l

    worst = 0.0
    for gi, group in enumerate(params.layer_params):
        for ai, arr in enumerate(group):
            flat = arr.ravel()
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up = loss_only(params)
                flat[j] = orig - h
                down = loss_only(params)
                flat[j] = orig
                numeric = (up - down) / (2.0 * h)
                analytic = grads[gi][ai].ravel()[j]
                scale = max(abs(analytic), abs(numeric), 1e-3)
                worst = max(worst, abs(analytic - numeric) / scale)
    return worst
