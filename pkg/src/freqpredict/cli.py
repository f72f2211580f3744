"""Command-line entry point.

Subcommands: gen-data, train, predict, estimate, bench.  Machine-readable
results go to stdout; the resolved configuration and diagnostics go to
stderr.  Exit codes: 0 success, 1 I/O or file-format problem, 2 bad
parameters, 3 training divergence, 4 estimator under-resolution.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .datagen import (
    Dataset,
    DatasetRecipe,
    RecipeId,
    generate,
    read_dataset,
    write_dataset,
)
from .errors import (
    FormatError,
    FreqPredictError,
    NumericalDegeneracyError,
    ParameterError,
    TrainingDivergedError,
    UnderResolutionError,
)
from .experiments import (
    MethodId,
    MethodSpec,
    emit,
    grid_experiment_l4,
    resolution_sweep,
    snr_sweep,
)
from .hrse import ESTIMATORS
from .neural.network import (
    default_architecture,
    predict_window,
    wide_architecture,
)
from .neural.training import TrainConfig, train
from .neural.weights_io import arch_from_dict, load_params, save_params
from .signal_core import SampleWindow

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARAMS = 2
EXIT_DIVERGED = 3
EXIT_UNDER_RESOLUTION = 4


def read_samples(path) -> np.ndarray:
    """Newline-delimited doubles; blank lines and # comments are skipped."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ParameterError(
                    f"{path}:{lineno}: not a number: {text!r}"
                ) from None
    if not values:
        raise ParameterError(f"{path}: no samples found")
    return np.asarray(values, dtype=np.float64)


def write_samples(values: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v in np.asarray(values, dtype=np.float64):
            fh.write(f"{float(v)!r}\n")


def _echo_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print("config " + json.dumps(resolved, sort_keys=True), file=sys.stderr)


def _prepared(path):
    """Create the parent directory so --out works on fresh paths."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_gen_data(args) -> int:
    recipe = DatasetRecipe(
        recipe_id=RecipeId(args.recipe),
        n=args.n,
        m=args.m,
        snr_db=args.snr,
        noise_instances=args.instances,
        seed=args.seed,
        set_size=args.set_size,
        subsample=args.subsample,
    )
    dataset = generate(recipe)
    write_dataset(dataset, _prepared(args.out))
    signals = len({ex.truth.frequencies for ex in dataset.examples})
    print(f"signals={signals}")
    print(f"examples={len(dataset)}")
    print(f"out={args.out}")
    return EXIT_OK


def _resolve_arch(name: str, input_len: int, output_len: int):
    if name == "desk":
        return default_architecture(input_len, output_len)
    if name == "wide":
        return wide_architecture(input_len, output_len)
    path = Path(name)
    if not path.is_file():
        raise ParameterError(
            f"--arch must be 'desk', 'wide', or a JSON file; got {name!r}"
        )
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: bad JSON: {exc}") from exc
    data.setdefault("input_len", input_len)
    data.setdefault("output_len", output_len)
    arch = arch_from_dict(data)
    if arch.input_len != input_len or arch.output_len != output_len:
        raise ParameterError(
            f"architecture maps {arch.input_len} -> {arch.output_len}, "
            f"data needs {input_len} -> {output_len}"
        )
    return arch


def _cmd_train(args) -> int:
    dataset = read_dataset(args.data)
    x_in, x_out = dataset.as_arrays()
    arch = _resolve_arch(args.arch, x_in.shape[1], x_out.shape[1])
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        init_seed=args.seed,
        shuffle_seed=args.seed + 1,
    )
    try:
        params, history = train((x_in, x_out), arch, cfg)
    except TrainingDivergedError as exc:
        checkpoint = str(args.out) + ".ckpt"
        if exc.params is not None:
            save_params(exc.params, _prepared(checkpoint))
            print(f"checkpoint={checkpoint}")
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    save_params(params, _prepared(args.out))
    history_path = str(args.out) + ".history.csv"
    with open(history_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss\n")
        for i, loss in enumerate(history):
            fh.write(f"{i},{loss!r}\n")
    print(f"weights={args.out}")
    print(f"history={history_path}")
    print(f"final_loss={history[-1]!r}")
    return EXIT_OK


def _cmd_predict(args) -> int:
    params = load_params(args.weights)
    samples = read_samples(args.input)
    window = SampleWindow(samples, start_index=args.start_index)
    predicted = predict_window(params, window)
    write_samples(predicted.samples, _prepared(args.out))
    print(f"out={args.out}")
    print(f"samples={len(predicted)}")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    samples = read_samples(args.input)
    window = SampleWindow(samples, start_index=args.start_index)
    if args.weights is not None:
        from .signal_core import concat

        params = load_params(args.weights)
        predicted = predict_window(params, window)
        window = concat(window, predicted)
    estimator = ESTIMATORS[args.method]
    if args.method == "periodogram":
        estimate = estimator(window, args.l, grid_size=args.grid_size)
    else:
        estimate = estimator(window, args.l)
    print(" ".join(f"{f:.8f}" for f in estimate.frequencies))
    return EXIT_OK


def _bench_methods(config: dict) -> list[MethodSpec]:
    methods = []
    for item in config.get("methods", []):
        methods.append(
            MethodSpec(
                id=MethodId(item["id"]),
                estimator=item.get("estimator", "esprit"),
                predictor_path=item.get("weights"),
            )
        )
    if not methods:
        raise ParameterError("config lists no methods")
    return methods


def _cmd_bench(args) -> int:
    path = Path(args.config)
    try:
        config = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: bad JSON: {exc}") from exc
    try:
        kind = config["kind"]
        out_dir = config["out_dir"]
    except KeyError as exc:
        raise ParameterError(f"config missing key {exc}") from None
    scenario = config.get("scenario", {})
    n = int(scenario.get("n", 150))
    m = int(scenario.get("m", 50))
    trials = int(config.get("trials", 1000))
    seed = int(config.get("seed", 0))
    methods = _bench_methods(config)
    workers = max(1, int(args.threads))
    if kind == "snr":
        result = snr_sweep(
            methods,
            snr_list=config.get("snr_list", list((0.0, 5.0, 10.0, 15.0, 20.0, 25.0))),
            trials=trials, n=n, m=m, seed=seed, max_workers=workers,
        )
    elif kind == "resolution":
        result = resolution_sweep(
            methods,
            delta_list=config["delta_list"],
            snr_db=float(config.get("snr_db", 20.0)),
            trials=trials, n=n, m=m, seed=seed, max_workers=workers,
        )
    elif kind == "grid-l4":
        result = grid_experiment_l4(
            methods,
            snr_list=config.get("snr_list", [5.0, 20.0]),
            on_grid=bool(config.get("on_grid", True)),
            trials=trials, n=n, m=m, seed=seed, max_workers=workers,
        )
    else:
        raise ParameterError(f"unknown sweep kind {kind!r}")
    for written in emit(result, out_dir):
        print(f"wrote={written}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqpredict",
        description="Sinusoid frequency estimation with learned sample "
        "prediction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a training dataset")
    p.add_argument("--recipe", required=True,
                   choices=sorted(r.value for r in RecipeId))
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--snr", type=float, default=15.0)
    p.add_argument("--instances", type=int, default=1,
                   help="noise realizations per clean signal")
    p.add_argument("--set-size", type=int, default=20000,
                   help="signal count for the randomized set recipes")
    p.add_argument("--subsample", type=int, default=None,
                   help="keep a seeded random subset of the signals")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="train the continuation predictor")
    p.add_argument("--data", required=True, help="dataset file from gen-data")
    p.add_argument("--arch", default="desk",
                   help="'desk', 'wide', or a JSON architecture file")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--seed", type=int, default=0,
                   help="init seed; seed+1 shuffles")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="continue a sample file")
    p.add_argument("--input", required=True, help="samples file (one per line)")
    p.add_argument("--weights", required=True)
    p.add_argument("--start-index", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("estimate", help="estimate frequencies from samples")
    p.add_argument("--input", required=True, help="samples file (one per line)")
    p.add_argument("--l", type=int, required=True,
                   help="number of sinusoid components")
    p.add_argument("--method", default="esprit", choices=sorted(ESTIMATORS))
    p.add_argument("--weights", default=None,
                   help="predict a continuation first, then estimate")
    p.add_argument("--grid-size", type=int, default=4096)
    p.add_argument("--start-index", type=int, default=1)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("bench", help="run a configured sweep")
    p.add_argument("--config", required=True, help="JSON sweep description")
    p.add_argument("--threads", type=int, default=1,
                   help="trial evaluation threads")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING)
    parser = build_parser()
    args = parser.parse_args(argv)
    _echo_config(args)
    try:
        return args.func(args)
    except (UnderResolutionError, NumericalDegeneracyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNDER_RESOLUTION
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParameterError, FreqPredictError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
