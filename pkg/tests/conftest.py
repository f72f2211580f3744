import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# Verdict lines recorded by the acceptance tests; replayed after the run
# so they stay visible under output capture.
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def lp_predictor_params(frequencies, m=50, horizon=100):
    """Dense layer reproducing the exact autoregressive continuation.

    Extrapolation is linear in the window samples once the coefficients
    are fixed, so feeding unit vectors through it yields the matrix of
    the map.  Handy as a ground-truth predictor in integration tests.
    """
    from freqpredict.linear_predictor import (
        LPModel,
        analytic_coefficients,
        extrapolate,
    )
    from freqpredict.neural.network import (
        ArchitectureSpec,
        DenseSpec,
        PredictorParams,
    )
    from freqpredict.signal_core import SampleWindow

    model = LPModel(
        coeffs=analytic_coefficients(frequencies), residual=0.0, rank=None
    )
    w = np.zeros((horizon, m))
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        w[:, i] = extrapolate(model, SampleWindow(e), horizon).samples
    arch = ArchitectureSpec(
        layers=(DenseSpec(horizon, "linear"),), input_len=m, output_len=horizon
    )
    return PredictorParams(arch=arch, layer_params=((w, np.zeros(horizon)),))
