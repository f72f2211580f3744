"""Recipe-driven training data: frequency layouts, noise, serialization.

Each recipe describes how component frequencies are laid out (fixed grids
or randomized draws with separation rules), how many noise realizations
each clean signal gets, and the SNR.  Every example stores the first-m /
remaining-(n-m) split of one noisy window plus its ground truth.

Seeding is hierarchical: frequency draws for signal i come from the child
sequence (seed, 0, i) and the noise for instance j of signal i from
(seed, 1, i, j), so generation order, parallel or serial, cannot change
the output.
"""

from __future__ import annotations

import enum
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ParameterError
from .signal_core import NoiseSpec, SinusoidSpec, add_noise, split, synthesize

MAGIC = b"SINDATA1"
FORMAT_VERSION = 1

GRID_COARSE = (0.1, 0.2, 0.3, 0.4, 0.5)


class RecipeId(enum.Enum):
    GRID_L2 = "grid-l2"
    GRID_L4 = "grid-l4"
    SET_1 = "set-1"
    SET_2 = "set-2"
    SET_3 = "set-3"
    SET_4 = "set-4"
    SET_5 = "set-5"
    SET_6 = "set-6"


@dataclass(frozen=True)
class DatasetRecipe:
    """What to generate: layout family, window dims, SNR, sizes, seed.

    set_size only applies to the randomized families (set-1/2/4/5/6);
    subsample, when given, keeps a seeded random subset of the signal list
    (useful to scale the fixed grids down for quick runs).
    """

    recipe_id: RecipeId
    n: int = 150
    m: int = 50
    snr_db: float = 15.0
    noise_instances: int = 1
    seed: int = 0
    set_size: int = 20000
    subsample: int | None = None

    def __post_init__(self):
        if not isinstance(self.recipe_id, RecipeId):
            raise ParameterError(f"bad recipe id {self.recipe_id!r}")
        if int(self.n) < 2 or not 1 <= int(self.m) < int(self.n):
            raise ParameterError(
                f"need 1 <= m < n, got m={self.m}, n={self.n}"
            )
        if not math.isfinite(self.snr_db):
            raise ParameterError(f"snr_db must be finite, got {self.snr_db}")
        if int(self.noise_instances) < 1:
            raise ParameterError(
                f"noise_instances must be >= 1, got {self.noise_instances}"
            )
        if int(self.set_size) < 1:
            raise ParameterError(f"set_size must be >= 1, got {self.set_size}")
        if self.subsample is not None and int(self.subsample) < 1:
            raise ParameterError(f"subsample must be >= 1, got {self.subsample}")

    @property
    def delta_f(self) -> float:
        return 1.0 / self.n


@dataclass(frozen=True)
class DatasetExample:
    x_in: np.ndarray  # first m noisy samples
    x_out: np.ndarray  # remaining n - m noisy samples
    truth: SinusoidSpec
    recipe_id: str
    noise_seed: int


@dataclass
class Dataset:
    """Examples plus the recipe that made them (None for merged files)."""

    examples: list[DatasetExample]
    recipe: DatasetRecipe | None = None

    def __len__(self) -> int:
        return len(self.examples)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        x_in = np.stack([ex.x_in for ex in self.examples])
        x_out = np.stack([ex.x_out for ex in self.examples])
        return x_in, x_out


def _child_rng(*key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(key))))


def _child_seed(*key) -> int:
    return int(np.random.SeedSequence(list(key)).generate_state(1, np.uint64)[0])


def _uniform_open(rng, lo: float, hi: float) -> float:
    """Uniform draw from (lo, hi]; redraws the measure-zero lo endpoint."""
    while True:
        v = lo + (hi - lo) * rng.random()
        if v > lo:
            return v


def _grid_l2_signals(recipe: DatasetRecipe) -> list[tuple[float, ...]]:
    k_max = int(math.floor(0.5 * recipe.n + 1e-9))
    return [
        (f1, k / recipe.n)
        for f1 in GRID_COARSE
        for k in range(1, k_max + 1)
    ]


def _grid_l4_signals(recipe: DatasetRecipe) -> list[tuple[float, ...]]:
    out = []
    for a in GRID_COARSE:
        for b in GRID_COARSE:
            for c in GRID_COARSE:
                for d in GRID_COARSE:
                    out.append((a, b, c, d))
    return out


def _set3_signals(recipe: DatasetRecipe) -> list[tuple[float, ...]]:
    k_max = int(math.floor(0.5 * recipe.n + 1e-9))
    return [
        (j / recipe.n, k / recipe.n)
        for j in range(1, k_max + 1)
        for k in range(1, k_max + 1)
    ]


def _random_pair(recipe: DatasetRecipe, rng) -> tuple[float, ...]:
    df = recipe.delta_f
    rid = recipe.recipe_id
    if rid is RecipeId.SET_1:
        f1 = _uniform_open(rng, 0.0, 0.5 - df)
        return (f1, f1 + 0.5 * df)
    if rid is RecipeId.SET_2:
        # The eps interval alone does not force the separation; reject
        # draws that land inside (-2 df, 0) or leave (0, 0.5].
        while True:
            f1 = _uniform_open(rng, 0.0, 0.5 - df)
            eps = rng.uniform(-(f1 + df), 0.5 - f1 - df)
            f2 = f1 + df + eps
            if 0.0 < f2 <= 0.5 and abs(f2 - f1) >= df:
                return (f1, f2)
    if rid is RecipeId.SET_4:
        while True:
            f1 = _uniform_open(rng, 0.0, 0.5 - df)
            k_lo = math.ceil(-f1 / df)
            k_hi = math.floor((0.5 - f1) / df)
            k = int(rng.integers(k_lo, k_hi + 1))
            f2 = f1 + k * df
            if 0.0 < f2 <= 0.5:
                return (f1, f2)
    if rid is RecipeId.SET_5:
        return (
            _uniform_open(rng, 0.0, 0.5),
            _uniform_open(rng, 0.0, 0.5),
        )
    if rid is RecipeId.SET_6:
        while True:
            f1 = rng.normal(0.25, 0.25)
            if 0.0 < f1 <= 0.5:
                break
        return (f1, _uniform_open(rng, 0.0, 0.5))
    raise ParameterError(f"recipe {rid} has no random layout")


def signal_layout(recipe: DatasetRecipe) -> list[tuple[float, ...]]:
    """Frequency tuples for every clean signal of the recipe, pre-subsample."""
    rid = recipe.recipe_id
    if rid is RecipeId.GRID_L2:
        sigs = _grid_l2_signals(recipe)
    elif rid is RecipeId.GRID_L4:
        sigs = _grid_l4_signals(recipe)
    elif rid is RecipeId.SET_3:
        sigs = _set3_signals(recipe)
    else:
        sigs = [
            _random_pair(recipe, _child_rng(recipe.seed, 0, i))
            for i in range(recipe.set_size)
        ]
    if recipe.subsample is not None:
        if recipe.subsample > len(sigs):
            raise ParameterError(
                f"subsample {recipe.subsample} exceeds {len(sigs)} signals"
            )
        rng = _child_rng(recipe.seed, 2)
        keep = np.sort(rng.choice(len(sigs), recipe.subsample, replace=False))
        sigs = [sigs[i] for i in keep]
    return sigs


def generate(recipe: DatasetRecipe) -> Dataset:
    """Produce every (signal, noise instance) example of the recipe.

    Grid combinations whose components all sit at 0.5 synthesize to an
    identically zero window (the sin model vanishes there); those keep
    sigma = 0 since SNR scaling is undefined on them.
    """
    examples = []
    for i, freqs in enumerate(signal_layout(recipe)):
        truth = SinusoidSpec(amplitudes=(1.0,) * len(freqs), frequencies=freqs)
        clean = synthesize(truth, recipe.n)
        zero_signal = clean.energy() == 0.0
        for j in range(recipe.noise_instances):
            noise_seed = _child_seed(recipe.seed, 1, i, j)
            if zero_signal:
                noise = NoiseSpec(sigma=0.0, seed=noise_seed)
            else:
                noise = NoiseSpec(snr_db=recipe.snr_db, seed=noise_seed)
            noisy, _ = add_noise(clean, noise)
            head, tail = split(noisy, recipe.m)
            examples.append(
                DatasetExample(
                    x_in=head.samples,
                    x_out=tail.samples,
                    truth=truth,
                    recipe_id=recipe.recipe_id.value,
                    noise_seed=noise_seed,
                )
            )
    return Dataset(examples=examples, recipe=recipe)


def merge_datasets(datasets: list[Dataset]) -> Dataset:
    """Concatenate example lists; per-example metadata is what survives."""
    if not datasets:
        raise ParameterError("nothing to merge")
    dims = {(ex.x_in.size, ex.x_out.size) for ds in datasets for ex in ds.examples}
    if len(dims) > 1:
        raise ParameterError(f"mixed window dims {sorted(dims)}")
    merged = [ex for ds in datasets for ex in ds.examples]
    recipes = {ds.recipe for ds in datasets}
    recipe = datasets[0].recipe if len(recipes) == 1 else None
    return Dataset(examples=merged, recipe=recipe)


def train_test_split(
    dataset: Dataset, ratio: float, seed: int = 0
) -> tuple[Dataset, Dataset]:
    """Disjoint shuffled split, stratified by recipe id, ratio to train.

    Per-group train counts are round(ratio * group size); original example
    order is preserved inside each side.
    """
    if not 0.0 < ratio < 1.0:
        raise ParameterError(f"ratio must be in (0, 1), got {ratio}")
    if len(dataset) < 2:
        raise ParameterError("need at least two examples to split")
    groups: dict[str, list[int]] = {}
    for i, ex in enumerate(dataset.examples):
        groups.setdefault(ex.recipe_id, []).append(i)
    rng = _child_rng(seed, 3)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for rid in sorted(groups):
        idx = np.array(groups[rid])
        perm = rng.permutation(len(idx))
        take = int(round(ratio * len(idx)))
        train_idx.extend(idx[perm[:take]].tolist())
        test_idx.extend(idx[perm[take:]].tolist())
    if not train_idx or not test_idx:
        raise ParameterError(
            f"ratio {ratio} leaves an empty side for {len(dataset)} examples"
        )
    train_idx.sort()
    test_idx.sort()
    return (
        Dataset([dataset.examples[i] for i in train_idx], dataset.recipe),
        Dataset([dataset.examples[i] for i in test_idx], dataset.recipe),
    )


def _recipe_to_dict(recipe: DatasetRecipe | None):
    if recipe is None:
        return None
    return {
        "recipe_id": recipe.recipe_id.value,
        "n": recipe.n,
        "m": recipe.m,
        "snr_db": recipe.snr_db,
        "noise_instances": recipe.noise_instances,
        "seed": recipe.seed,
        "set_size": recipe.set_size,
        "subsample": recipe.subsample,
    }


def _recipe_from_dict(data) -> DatasetRecipe | None:
    if data is None:
        return None
    try:
        return DatasetRecipe(
            recipe_id=RecipeId(data["recipe_id"]),
            n=int(data["n"]),
            m=int(data["m"]),
            snr_db=float(data["snr_db"]),
            noise_instances=int(data["noise_instances"]),
            seed=int(data["seed"]),
            set_size=int(data["set_size"]),
            subsample=None if data.get("subsample") is None else int(data["subsample"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed recipe echo: {exc}") from exc


def manifest_text(dataset: Dataset) -> str:
    counts: dict[str, int] = {}
    for ex in dataset.examples:
        counts[ex.recipe_id] = counts.get(ex.recipe_id, 0) + 1
    truths = {
        (ex.recipe_id,) + ex.truth.frequencies for ex in dataset.examples
    }
    lines = ["dataset manifest"]
    r = dataset.recipe
    if r is not None:
        lines.append(f"recipe: {r.recipe_id.value}")
        lines.append(f"n: {r.n}")
        lines.append(f"m: {r.m}")
        lines.append(f"snr_db: {r.snr_db!r}")
        lines.append(f"seed: {r.seed}")
        lines.append(f"noise_instances: {r.noise_instances}")
    else:
        lines.append("recipe: merged")
    lines.append(f"signals: {len(truths)}")
    lines.append(f"examples: {len(dataset)}")
    for rid in sorted(counts):
        lines.append(f"examples[{rid}]: {counts[rid]}")
    return "\n".join(lines) + "\n"


def write_dataset(dataset: Dataset, path) -> None:
    """Binary examples file plus a human-readable <path>.manifest sidecar."""
    if not dataset.examples:
        raise ParameterError("refusing to write an empty dataset")
    path = Path(path)
    m = dataset.examples[0].x_in.size
    out_len = dataset.examples[0].x_out.size
    header = {
        "format_version": FORMAT_VERSION,
        "recipe": _recipe_to_dict(dataset.recipe),
        "examples": len(dataset),
        "m": m,
        "n": m + out_len,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for ex in dataset.examples:
            if ex.x_in.size != m or ex.x_out.size != out_len:
                raise ParameterError("inconsistent example dimensions")
            rid = ex.recipe_id.encode("utf-8")
            fh.write(struct.pack("<IQH", ex.truth.count, ex.noise_seed, len(rid)))
            fh.write(rid)
            fh.write(np.asarray(ex.truth.amplitudes, "<f8").tobytes())
            fh.write(np.asarray(ex.truth.frequencies, "<f8").tobytes())
            fh.write(np.ascontiguousarray(ex.x_in, "<f8").tobytes())
            fh.write(np.ascontiguousarray(ex.x_out, "<f8").tobytes())
    manifest = path.with_name(path.name + ".manifest")
    manifest.write_text(manifest_text(dataset), encoding="utf-8")


def read_dataset(path) -> Dataset:
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 4 or raw[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: not a dataset file (bad magic)")
    (hlen,) = struct.unpack("<I", raw[len(MAGIC) : len(MAGIC) + 4])
    offset = len(MAGIC) + 4
    if len(raw) < offset + hlen:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[offset : offset + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable header: {exc}") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise FormatError(
            f"{path}: format version {header.get('format_version')!r}, "
            f"expected {FORMAT_VERSION}"
        )
    offset += hlen
    try:
        count = int(header["examples"])
        m = int(header["m"])
        n = int(header["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed header: {exc}") from exc
    recipe = _recipe_from_dict(header.get("recipe"))
    examples = []

    def take(nbytes, what):
        nonlocal offset
        if offset + nbytes > len(raw):
            raise FormatError(f"{path}: truncated while reading {what}")
        chunk = raw[offset : offset + nbytes]
        offset += nbytes
        return chunk

    for _ in range(count):
        l, noise_seed, rid_len = struct.unpack("<IQH", take(14, "record header"))
        rid = take(rid_len, "recipe id").decode("utf-8")
        amps = np.frombuffer(take(8 * l, "amplitudes"), "<f8").astype(np.float64)
        freqs = np.frombuffer(take(8 * l, "frequencies"), "<f8").astype(np.float64)
        x_in = np.frombuffer(take(8 * m, "input samples"), "<f8").astype(np.float64)
        x_out = np.frombuffer(take(8 * (n - m), "output samples"), "<f8").astype(
            np.float64
        )
        examples.append(
            DatasetExample(
                x_in=x_in,
                x_out=x_out,
                truth=SinusoidSpec(tuple(amps), tuple(freqs)),
                recipe_id=rid,
                noise_seed=int(noise_seed),
            )
        )
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} trailing bytes")
    return Dataset(examples=examples, recipe=recipe)
