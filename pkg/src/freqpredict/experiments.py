"""Monte Carlo comparison of the three estimation strategies.

Strategies share a scenario (window length n, prefix length m):

* first-window: estimate from the m measured samples only;
* full-window: estimate from all n measured samples (the ceiling);
* predict-extend: run the learned predictor on the m measured samples,
  concatenate, estimate from the n-sample result.

Trials are paired: the truth and the base noise draw for trial t depend
only on (master seed, t), so every method, and every sweep cell, sees the
same realization with only the noise scale tracking the cell's SNR.
Estimator failures (under-resolution, degenerate collapse) count as
failures and are excluded from the aggregate mean, which is reported in
dB of the mean linear NMSE.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateSignalError,
    NumericalDegeneracyError,
    ParameterError,
    ShapeError,
    UnderResolutionError,
)
from .hrse import ESTIMATORS
from .metrics import nmse, nmse_db
from .neural.network import PredictorParams, predict_window
from .neural.weights_io import load_params
from .signal_core import NoiseSpec, SinusoidSpec, add_noise, concat, split, synthesize

log = logging.getLogger(__name__)

DEFAULT_SNR_LIST = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)

# Errors that mean "this trial produced no usable estimate" rather than
# "the harness is misconfigured".
TRIAL_FAILURES = (
    UnderResolutionError,
    NumericalDegeneracyError,
    DegenerateSignalError,
)


class MethodId(enum.Enum):
    FIRST_WINDOW = "m1"
    FULL_WINDOW = "m2"
    PREDICT_EXTEND = "m3"


@dataclass(frozen=True)
class MethodSpec:
    id: MethodId
    estimator: str = "esprit"
    predictor_path: str | None = None

    def __post_init__(self):
        if not isinstance(self.id, MethodId):
            raise ParameterError(f"bad method id {self.id!r}")
        if self.estimator not in ESTIMATORS:
            raise ParameterError(
                f"unknown estimator {self.estimator!r}; "
                f"choose from {sorted(ESTIMATORS)}"
            )
        if self.id is MethodId.PREDICT_EXTEND and self.predictor_path is None:
            raise ParameterError("predict-extend needs a predictor_path")

    @property
    def label(self) -> str:
        return self.id.value


@dataclass(frozen=True)
class TrialRecord:
    method: str
    snr_db: float | None
    delta: float | None
    trial: int
    nmse: float | None  # None on failure
    failed: bool


@dataclass(frozen=True)
class AggregateRecord:
    method: str
    sweep_var: str
    value: float
    mean_nmse_db: float
    trials: int
    failures: int


@dataclass
class ExperimentResult:
    sweep_var: str
    trials: list[TrialRecord]
    aggregates: list[AggregateRecord]


def resolve_predictor(
    method: MethodSpec, n: int, m: int, cache: dict | None = None
) -> PredictorParams | None:
    """Load and dimension-check the predictor a method needs, if any."""
    if method.id is not MethodId.PREDICT_EXTEND:
        return None
    if cache is not None and method.predictor_path in cache:
        params = cache[method.predictor_path]
    else:
        params = load_params(method.predictor_path)
        if cache is not None:
            cache[method.predictor_path] = params
    arch = params.arch
    if arch.input_len != m or arch.input_len + arch.output_len != n:
        raise ShapeError(
            f"predictor {method.predictor_path} maps "
            f"{arch.input_len} -> {arch.output_len} samples, scenario "
            f"needs {m} -> {n - m}"
        )
    return params


def run_method(
    method: MethodSpec,
    truth: SinusoidSpec,
    n: int,
    m: int,
    snr_db: float | None,
    seed: int = 0,
    predictor: PredictorParams | None = None,
):
    """One trial of one method; snr_db None means noiseless.

    The noisy realization depends only on (truth, n, snr_db, seed), never
    on the method, so calling this per method with shared arguments gives
    paired comparisons.
    """
    n, m = int(n), int(m)
    if not 1 <= m < n:
        raise ParameterError(f"need 1 <= m < n, got m={m}, n={n}")
    clean = synthesize(truth, n)
    if snr_db is None:
        noisy = clean
    else:
        noisy, _ = add_noise(clean, NoiseSpec(snr_db=snr_db, seed=seed))
    estimate_fn = ESTIMATORS[method.estimator]
    if method.id is MethodId.FULL_WINDOW:
        window = noisy
    elif method.id is MethodId.FIRST_WINDOW:
        window, _ = split(noisy, m)
    else:
        if predictor is None:
            predictor = resolve_predictor(method, n, m)
        head, _ = split(noisy, m)
        window = concat(head, predict_window(predictor, head))
    return estimate_fn(window, truth.count)


def _trial_basis(master_seed: int, trial: int) -> tuple[np.random.Generator, int]:
    """(frequency rng, noise seed) for one trial, method/cell independent."""
    freq_rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([int(master_seed), 0, trial]))
    )
    noise_seed = int(
        np.random.SeedSequence([int(master_seed), 1, trial]).generate_state(
            1, np.uint64
        )[0]
    )
    return freq_rng, noise_seed


def uniform_pair_sampler(rng: np.random.Generator) -> SinusoidSpec:
    """Two unit-amplitude components drawn uniformly from (0, 0.5]."""
    freqs = []
    while len(freqs) < 2:
        f = 0.5 * rng.random()
        if f > 0.0:
            freqs.append(f)
    return SinusoidSpec((1.0, 1.0), tuple(freqs))


def separation_pair_sampler(delta: float) -> Callable:
    """f1 uniform over (0, 0.5 - delta], f2 = f1 + delta."""

    def sample(rng: np.random.Generator) -> SinusoidSpec:
        hi = 0.5 - delta
        if hi <= 0.0:
            raise ParameterError(f"separation {delta} does not fit in (0, 0.5]")
        while True:
            f1 = hi * rng.random()
            if f1 > 0.0:
                break
        return SinusoidSpec((1.0, 1.0), (f1, f1 + delta))

    return sample


# The 0.5 grid point is invisible to the real sin model (sin(pi n) == 0),
# so on-grid evaluation draws distinct frequencies from the visible points.
VISIBLE_GRID = (0.1, 0.2, 0.3, 0.4)


def grid_l4_sampler(on_grid: bool, min_sep: float) -> Callable:
    def sample(rng: np.random.Generator) -> SinusoidSpec:
        if on_grid:
            freqs = tuple(
                sorted(rng.choice(VISIBLE_GRID, size=4, replace=False).tolist())
            )
            return SinusoidSpec((1.0,) * 4, freqs)
        while True:
            freqs = np.sort(0.5 * rng.random(4))
            if freqs[0] > 0.0 and np.all(np.diff(freqs) >= min_sep):
                return SinusoidSpec((1.0,) * 4, tuple(freqs.tolist()))

    return sample


def _sweep(
    methods: Sequence[MethodSpec],
    sweep_var: str,
    cells: Sequence[tuple[float, float | None, float | None, Callable]],
    trials: int,
    n: int,
    m: int,
    seed: int,
    max_workers: int = 1,
) -> ExperimentResult:
    """Shared engine: cells are (value, snr_db, delta, sampler)."""
    if int(trials) < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if not methods:
        raise ParameterError("need at least one method")
    cache: dict = {}
    predictors = {
        ms.label: resolve_predictor(ms, n, m, cache) for ms in methods
    }

    def one_trial(args):
        value, snr_db, delta, sampler, t = args
        freq_rng, noise_seed = _trial_basis(seed, t)
        truth = sampler(freq_rng)
        rows = []
        for ms in methods:
            try:
                est = run_method(
                    ms, truth, n, m, snr_db, noise_seed, predictors[ms.label]
                )
                err = nmse(truth.frequencies, est.frequencies)
                rows.append(
                    TrialRecord(ms.label, snr_db, delta, t, err, False)
                )
            except TRIAL_FAILURES as exc:
                log.debug(
                    "trial %d %s at %s=%s failed: %s",
                    t, ms.label, sweep_var, value, exc,
                )
                rows.append(TrialRecord(ms.label, snr_db, delta, t, None, True))
        return rows

    trial_rows: list[TrialRecord] = []
    aggregates: list[AggregateRecord] = []
    for value, snr_db, delta, sampler in cells:
        work = [(value, snr_db, delta, sampler, t) for t in range(trials)]
        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                per_trial = list(pool.map(one_trial, work))
        else:
            per_trial = [one_trial(w) for w in work]
        cell_rows = [row for rows in per_trial for row in rows]
        trial_rows.extend(cell_rows)
        for ms in methods:
            mine = [r for r in cell_rows if r.method == ms.label]
            good = [r.nmse for r in mine if not r.failed]
            failures = sum(r.failed for r in mine)
            if failures:
                log.info(
                    "%s at %s=%s: %d/%d trials failed (excluded from mean)",
                    ms.label, sweep_var, value, failures, len(mine),
                )
            mean_db = nmse_db(good) if good else float("-inf")
            aggregates.append(
                AggregateRecord(
                    method=ms.label,
                    sweep_var=sweep_var,
                    value=value,
                    mean_nmse_db=mean_db,
                    trials=len(mine),
                    failures=failures,
                )
            )
    return ExperimentResult(sweep_var, trial_rows, aggregates)


def snr_sweep(
    methods: Sequence[MethodSpec],
    snr_list: Sequence[float] = DEFAULT_SNR_LIST,
    trials: int = 1000,
    n: int = 150,
    m: int = 50,
    freq_sampler: Callable | None = None,
    seed: int = 0,
    max_workers: int = 1,
) -> ExperimentResult:
    sampler = freq_sampler or uniform_pair_sampler
    cells = [(float(s), float(s), None, sampler) for s in snr_list]
    if not cells:
        raise ParameterError("snr_list is empty")
    return _sweep(methods, "snr_db", cells, trials, n, m, seed, max_workers)


def resolution_sweep(
    methods: Sequence[MethodSpec],
    delta_list: Sequence[float],
    snr_db: float = 20.0,
    trials: int = 1000,
    n: int = 150,
    m: int = 50,
    seed: int = 0,
    max_workers: int = 1,
) -> ExperimentResult:
    cells = [
        (float(d), float(snr_db), float(d), separation_pair_sampler(float(d)))
        for d in delta_list
    ]
    if not cells:
        raise ParameterError("delta_list is empty")
    return _sweep(methods, "delta", cells, trials, n, m, seed, max_workers)


def grid_experiment_l4(
    methods: Sequence[MethodSpec],
    snr_list: Sequence[float] = (5.0, 20.0),
    on_grid: bool = True,
    trials: int = 1000,
    n: int = 150,
    m: int = 50,
    seed: int = 0,
    max_workers: int = 1,
) -> ExperimentResult:
    sampler = grid_l4_sampler(on_grid, min_sep=1.0 / n)
    cells = [(float(s), float(s), None, sampler) for s in snr_list]
    if not cells:
        raise ParameterError("snr_list is empty")
    return _sweep(methods, "snr_db", cells, trials, n, m, seed, max_workers)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(result: ExperimentResult, out_dir) -> list[Path]:
    """Write trials.csv, aggregates.csv, and the sweep plot; returns paths.

    Floats are written with round-trip repr so aggregates can be recomputed
    exactly from the trials file.  The plot is skipped for empty results.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    trials_path = out / "trials.csv"
    with open(trials_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "snr_db", "delta", "trial", "nmse", "failed"])
        for r in result.trials:
            writer.writerow(
                [r.method, _fmt(r.snr_db), _fmt(r.delta), r.trial,
                 _fmt(r.nmse), _fmt(r.failed)]
            )
    written.append(trials_path)

    agg_path = out / "aggregates.csv"
    with open(agg_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["method", "sweep_var", "value", "mean_nmse_db", "trials", "failures"]
        )
        for a in result.aggregates:
            writer.writerow(
                [a.method, a.sweep_var, _fmt(a.value), _fmt(a.mean_nmse_db),
                 a.trials, a.failures]
            )
    written.append(agg_path)

    if result.aggregates:
        written.append(_plot(result, out))
    return written


_AXIS_LABELS = {"snr_db": "SNR (dB)", "delta": "separation (cycles/sample)"}


def _plot(result: ExperimentResult, out: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "freqpredict"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        methods = sorted({a.method for a in result.aggregates})
        plotted = False
        for name in methods:
            pts = [
                (a.value, a.mean_nmse_db)
                for a in result.aggregates
                if a.method == name and math.isfinite(a.mean_nmse_db)
            ]
            if not pts:
                continue
            xs, ys = zip(*sorted(pts))
            ax.plot(xs, ys, marker="o", label=name)
            plotted = True
        ax.set_xlabel(_AXIS_LABELS.get(result.sweep_var, result.sweep_var))
        ax.set_ylabel("NMSE (dB)")
        ax.grid(True, alpha=0.3)
        if plotted:
            ax.legend()
        fig.tight_layout()
        path = out / f"nmse_vs_{result.sweep_var}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
