"""Exception taxonomy shared across the package.

Everything derives from FreqPredictError so callers can catch broadly; the
subclasses exist because the CLI maps them to distinct exit codes and the
experiment harness treats some of them as countable trial failures rather
than hard aborts.
"""


class FreqPredictError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(FreqPredictError, ValueError):
    """Invalid argument value or inconsistent configuration."""


class ShapeError(FreqPredictError, ValueError):
    """Array or window dimensions incompatible with the requested operation."""


class ContiguityError(FreqPredictError, ValueError):
    """Windows do not line up index-wise for concatenation."""


class DegenerateSignalError(FreqPredictError, ValueError):
    """Operation undefined on an all-zero signal (SNR scaling, NMSE truth)."""


class DegenerateFitError(FreqPredictError):
    """Least-squares fit has no usable solution (zero-rank system)."""


class NumericalDegeneracyError(FreqPredictError):
    """Numerical structure collapsed: unstable root pairing, rank collapse."""


class UnderResolutionError(FreqPredictError):
    """Estimator could not produce the requested number of frequencies."""


class NumericError(FreqPredictError):
    """Non-finite values appeared during network evaluation."""


class FormatError(FreqPredictError):
    """Serialized file is malformed, truncated, or version-incompatible."""


class TrainingDivergedError(FreqPredictError):
    """Training loss became non-finite.

    Carries the last finite-loss parameters and the loss history so callers
    can checkpoint what was still usable.
    """

    def __init__(self, message, params=None, history=None):
        super().__init__(message)
        self.params = params
        self.history = list(history) if history is not None else []
