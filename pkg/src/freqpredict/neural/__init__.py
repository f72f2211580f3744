"""Sample-continuation network: from-scratch layers, Adam, persistence."""

from .network import (
    ArchitectureSpec,
    Conv1DSpec,
    DenseSpec,
    FlattenSpec,
    PredictorParams,
    default_architecture,
    forward,
    init_params,
    loss_and_gradients,
    predict_window,
    wide_architecture,
)
from .training import TrainConfig, gradient_check, train
from .weights_io import arch_from_dict, arch_to_dict, load_params, save_params

__all__ = [
    "ArchitectureSpec",
    "Conv1DSpec",
    "DenseSpec",
    "FlattenSpec",
    "PredictorParams",
    "TrainConfig",
    "arch_from_dict",
    "arch_to_dict",
    "default_architecture",
    "forward",
    "gradient_check",
    "init_params",
    "load_params",
    "loss_and_gradients",
    "predict_window",
    "save_params",
    "train",
    "wide_architecture",
]
