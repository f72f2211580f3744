"""Learned sample prediction for high-resolution sinusoid frequency estimation.

Short windows limit how finely classical estimators can separate close
sinusoids.  This package trains a convolutional network to continue a short
measured window, then hands the extended window to a high-resolution
estimator; the classical chain (synthesis, linear prediction, subspace and
polynomial estimators, periodogram) is here too, as are the dataset
recipes and the paired-trial benchmark harness.
"""

from . import (
    datagen,
    errors,
    experiments,
    hrse,
    linear_predictor,
    metrics,
    neural,
    signal_core,
)
from .signal_core import (
    NoiseSpec,
    Provenance,
    SampleWindow,
    SignalModel,
    SinusoidSpec,
    add_noise,
    concat,
    split,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "NoiseSpec",
    "Provenance",
    "SampleWindow",
    "SignalModel",
    "SinusoidSpec",
    "add_noise",
    "concat",
    "datagen",
    "errors",
    "experiments",
    "hrse",
    "linear_predictor",
    "metrics",
    "neural",
    "signal_core",
    "split",
    "synthesize",
]
