"""Experiment driver: multi-seed training, degree sweeps, depth sweeps,
activation ablations and timing, all as pure functions of their config.

Seed pairing: within one command every model/cell sees the same per-seed
dataset and split, so comparisons are paired rather than confounded by
sampling. Multi-seed fan-out uses worker threads with per-run generators;
aggregation sorts by seed so the output is order-independent.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import build_basis_cache
from .data import (CsbmParams, Dataset, Split, csbm_generate, csbm_params_for,
                   load_dataset, random_split)
from .errors import ConfigError, InputError
from .model import ARCHITECTURES, TrainConfig
from .train import RunRecord, train_single

SCHEMA_VERSION = "gscnet-experiments/1"

# Two-sided 95% Student-t critical values by degrees of freedom. Entries
# beyond the table fall back to the closest smaller df, then the normal
# limit.
_T975 = {1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447,
         7: 2.365, 8: 2.306, 9: 2.262, 10: 2.228, 11: 2.201, 12: 2.179,
         13: 2.160, 14: 2.145, 15: 2.131, 16: 2.120, 17: 2.110, 18: 2.101,
         19: 2.093, 20: 2.086, 25: 2.060, 30: 2.042, 40: 2.021, 60: 2.000,
         120: 1.980}


def t_critical_975(df: int) -> float:
    if df <= 0:
        return float("nan")
    if df in _T975:
        return _T975[df]
    usable = [k for k in _T975 if k <= df]
    return _T975[max(usable)] if usable else 1.960


def mean_ci95(values) -> tuple[float, float]:
    """Mean and its 95% confidence half-width (Student-t over seed means)."""
    v = np.asarray(values, dtype=np.float64)
    mean = float(v.mean())
    if v.size < 2:
        return mean, float("nan")
    sem = float(v.std(ddof=1)) / math.sqrt(v.size)
    return mean, t_critical_975(v.size - 1) * sem


@dataclass
class ExperimentConfig:
    dataset: dict = field(default_factory=lambda: {"kind": "csbm",
                                                   "regime": "homophily"})
    arch: str = "GSCNet"
    k1: int = 2
    k2: int = 2
    train: TrainConfig = field(default_factory=TrainConfig)
    seeds: list = field(default_factory=lambda: [0])
    out_dir: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.arch not in ARCHITECTURES:
            raise ConfigError(f"unknown arch {self.arch!r}")
        if not self.seeds:
            raise ConfigError("seed list must not be empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seed list contains duplicates")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        obj.pop("schema", None)
        try:
            train = TrainConfig(**obj.pop("train", {}))
            repeats = obj.pop("repeats", None)
            seeds = obj.pop("seeds", None)
            if seeds is None:
                seeds = list(range(repeats)) if repeats else [0]
            elif repeats is not None and len(seeds) != repeats:
                raise ConfigError(
                    f"seed list length {len(seeds)} != repeats {repeats}")
            return cls(train=train, seeds=list(seeds), **obj)
        except (TypeError, InputError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc

    def to_json(self) -> dict:
        return {"schema": SCHEMA_VERSION, "dataset": self.dataset,
                "arch": self.arch, "k1": self.k1, "k2": self.k2,
                "train": self.train.__dict__, "seeds": list(self.seeds),
                "out_dir": self.out_dir, "threads": self.threads}


_FILE_CACHE: dict = {}


def make_dataset(spec: dict, seed: int) -> Dataset:
    """Instantiate the configured dataset for one seed.

    CSBM datasets are redrawn per seed; file datasets are loaded once and
    shared (they are immutable).
    """
    kind = spec.get("kind", "csbm")
    if kind == "csbm":
        opts = {k: v for k, v in spec.items() if k not in ("kind", "regime")}
        if "regime" in spec:
            params = csbm_params_for(spec["regime"], seed=seed, **opts)
        else:
            params = CsbmParams(seed=seed, **opts)
        return csbm_generate(params)
    if kind == "files":
        key = (spec["edges"], spec["features"], spec["labels"])
        if key not in _FILE_CACHE:
            _FILE_CACHE[key] = load_dataset(*key)
        return _FILE_CACHE[key]
    raise ConfigError(f"unknown dataset kind {kind!r}")


def _run_one_seed(config: ExperimentConfig, seed: int, arch: str,
                  k1: int, k2: int, record_epochs: bool) -> RunRecord:
    ds = make_dataset(config.dataset, seed)
    split = random_split(ds.n, seed=seed)
    cfg = replace(config.train, seed=seed)
    return train_single(ds, split, arch, k1, k2, cfg,
                        record_epochs=record_epochs)


def _fan_out(config: ExperimentConfig, jobs: list) -> list:
    """jobs: list of (key, callable); returns [(key, result)] sorted by key."""
    if config.threads == 1:
        results = [(key, fn()) for key, fn in jobs]
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            futures = [(key, pool.submit(fn)) for key, fn in jobs]
            results = [(key, f.result()) for key, f in futures]
    return sorted(results, key=lambda kv: kv[0])


def summarize_records(records: list) -> dict:
    accs = [r.test_acc for r in records]
    mean, ci = mean_ci95(accs)
    return {"mean_test_acc": mean, "ci95": ci,
            "per_seed": {str(r.seed): r.test_acc for r in records}}


def cmd_train(config: ExperimentConfig, record_epochs: bool = True) -> dict:
    """Train config.arch over the seed list; summary uses best-val selection."""
    jobs = [(seed, (lambda s=seed: _run_one_seed(
        config, s, config.arch, config.k1, config.k2, record_epochs)))
        for seed in config.seeds]
    records = [r for _, r in _fan_out(config, jobs)]
    summary = {"schema": SCHEMA_VERSION, "command": "train",
               "arch": config.arch, "k1": config.k1, "k2": config.k2,
               "dataset": config.dataset, **summarize_records(records)}
    return {"records": records, "summary": summary}


def cmd_sweep_degrees(config: ExperimentConfig, k1_range, k2_range) -> dict:
    """Mean accuracy per (k1, k2) cell over the shared seed list."""
    k1_range = list(k1_range)
    k2_range = list(k2_range)
    if not k1_range or not k2_range:
        raise ConfigError("sweep ranges must be non-empty")
    if min(k1_range + k2_range) < 0 or max(k1_range + k2_range) > 6:
        raise ConfigError("sweep degrees must lie in [0, 6]")

    jobs = []
    for k1 in k1_range:
        for k2 in k2_range:
            for seed in config.seeds:
                jobs.append(((k1, k2, seed),
                             (lambda a=k1, b=k2, s=seed: _run_one_seed(
                                 config, s, config.arch, a, b, False))))
    results = _fan_out(config, jobs)

    grid = {}
    for (k1, k2, _), rec in results:
        grid.setdefault((k1, k2), []).append(rec.test_acc)
    cells = [{"k1": k1, "k2": k2, "mean_test_acc": mean_ci95(v)[0],
              "ci95": mean_ci95(v)[1]}
             for (k1, k2), v in sorted(grid.items())]
    means = [c["mean_test_acc"] for c in cells]
    return {"schema": SCHEMA_VERSION, "command": "sweep",
            "arch": config.arch, "dataset": config.dataset,
            "k1_range": k1_range, "k2_range": k2_range, "cells": cells,
            "spread": float(max(means) - min(means))}


# Depth -> per-arch degree arguments: GSCNet grows both families, the
# baselines grow their single degree.
def _depth_degrees(arch: str, depth: int) -> tuple[int, int]:
    return (depth, depth) if arch == "GSCNet" else (depth, 0)


def cmd_oversmooth(config: ExperimentConfig, depths) -> dict:
    """Accuracy vs propagation depth for all four architectures, on the
    same per-seed datasets and splits."""
    depths = list(depths)
    if not depths or min(depths) < 1:
        raise ConfigError("depths must be >= 1")
    jobs = []
    for arch in ARCHITECTURES:
        for depth in depths:
            k1, k2 = _depth_degrees(arch, depth)
            for seed in config.seeds:
                jobs.append(((arch, depth, seed),
                             (lambda a=arch, d1=k1, d2=k2, s=seed:
                              _run_one_seed(config, s, a, d1, d2, False))))
    results = _fan_out(config, jobs)

    table = {}
    for (arch, depth, _), rec in results:
        table.setdefault(arch, {}).setdefault(depth, []).append(rec.test_acc)
    rows = {}
    for arch in ARCHITECTURES:
        rows[arch] = {str(d): mean_ci95(table[arch][d])[0] for d in depths}
    # Two decline measures: from the per-model peak, and end to end across
    # the sweep (negative = the model gains accuracy with depth).
    drops = {arch: max(vals.values()) - vals[str(depths[-1])]
             for arch, vals in rows.items()}
    declines = {arch: vals[str(depths[0])] - vals[str(depths[-1])]
                for arch, vals in rows.items()}
    return {"schema": SCHEMA_VERSION, "command": "oversmooth",
            "dataset": config.dataset, "depths": depths,
            "accuracy": rows, "drop_to_deepest": drops,
            "decline_shallow_to_deep": declines}


ABLATION_VARIANTS = ("positive", "negative", "mixed")


def cmd_ablate_activations(config: ExperimentConfig) -> dict:
    """GSCNet with the pure shifted basis, the pure Laplacian basis, and the
    mixed basis, on shared seeds/splits."""
    variant_degrees = {"positive": (config.k1, -1),
                       "negative": (-1, config.k2),
                       "mixed": (config.k1, config.k2)}
    jobs = []
    for variant, (k1, k2) in variant_degrees.items():
        for seed in config.seeds:
            jobs.append(((variant, seed),
                         (lambda a=k1, b=k2, s=seed: _run_one_seed(
                             config, s, "GSCNet", a, b, False))))
    results = _fan_out(config, jobs)

    accs = {variant: [] for variant in ABLATION_VARIANTS}
    for (variant, _), rec in results:
        accs[variant].append(rec.test_acc)
    rows = {}
    for variant in ABLATION_VARIANTS:
        mean, ci = mean_ci95(accs[variant])
        rows[variant] = {"mean_test_acc": mean, "ci95": ci,
                         "degrees": list(variant_degrees[variant])}
    return {"schema": SCHEMA_VERSION, "command": "ablate",
            "dataset": config.dataset, "rows": rows}


def cmd_bench(config: ExperimentConfig, warmup: int = 5) -> dict:
    """Per-epoch wall time (mean over measured epochs, warmup excluded) and
    total seconds, plus the per-epoch series for cumulative-time plots."""
    if warmup < 0:
        raise ConfigError("warmup must be >= 0")
    if config.train.epochs - warmup < 1:
        raise ConfigError(
            f"no measurement window: epochs={config.train.epochs} "
            f"with warmup={warmup}")
    seed = config.seeds[0]
    ds = make_dataset(config.dataset, seed)
    split = random_split(ds.n, seed=seed)
    cfg = replace(config.train, seed=seed, patience=config.train.epochs)
    record = train_single(ds, split, config.arch, config.k1, config.k2, cfg)
    series = [e.ms for e in record.epochs]
    measured = series[warmup:]
    return {"schema": SCHEMA_VERSION, "command": "bench",
            "arch": config.arch, "k1": config.k1, "k2": config.k2,
            "dataset": config.dataset, "warmup": warmup,
            "epochs_measured": len(measured),
            "per_epoch_ms": float(np.mean(measured)),
            "total_s": record.total_s, "series_ms": series}


def measure_cache_build(ds: Dataset, k1: int, k2: int, repeats: int = 5) -> float:
    """Median wall seconds to build the (k1, k2) basis cache."""
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        build_basis_cache(ds.graph, ds.features, k1, k2)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def write_json(path, obj: dict):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def write_records_jsonl(path, record: RunRecord):
    with open(path, "w", encoding="utf-8") as f:
        for e in record.epochs:
            f.write(json.dumps({"schema": SCHEMA_VERSION, "seed": record.seed,
                                **e.to_json()}, sort_keys=True) + "\n")


def write_grid_csv(path, sweep: dict):
    with open(path, "w", encoding="utf-8") as f:
        f.write("k1,k2,mean_test_acc,ci95\n")
        for cell in sweep["cells"]:
            f.write(f"{cell['k1']},{cell['k2']},"
                    f"{cell['mean_test_acc']:.6f},{cell['ci95']:.6f}\n")


def write_depth_csv(path, table: dict):
    depths = table["depths"]
    with open(path, "w", encoding="utf-8") as f:
        f.write("arch," + ",".join(f"depth_{d}" for d in depths) + "\n")
        for arch, vals in table["accuracy"].items():
            f.write(arch + "," + ",".join(f"{vals[str(d)]:.6f}"
                                          for d in depths) + "\n")
