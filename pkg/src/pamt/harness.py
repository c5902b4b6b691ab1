"""Multi-seed experiment runs and the results JSON they produce.

Seed ``s`` drives the data split, parameter initialization, dropout and
(in noise sweeps) edge sampling of one run. Runs are independent, so they
may execute in worker processes; results are always ordered by seed.
"""

from __future__ import annotations

import json
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import HyperParams
from .data import GraphBundle, generate_split
from .graph import inject_structure_noise, structure_noise_rate
from .trainer import Variant, parse_variant, train

SCHEMA_NAME = "pamt-results"
SCHEMA_VERSION = 1
WORKERS_ENV = "PAMT_WORKERS"

RESULTS_SCHEMA = {
    "type": "object",
    "required": ["schema", "version", "command", "dataset", "base_seed", "config", "results"],
    "properties": {
        "schema": {"const": SCHEMA_NAME},
        "version": {"const": SCHEMA_VERSION},
        "command": {"type": "string"},
        "dataset": {"type": "string"},
        "base_seed": {"type": "integer"},
        "config": {"type": "object"},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["variant", "dataset", "seeds", "accuracies", "mean", "std"],
                "properties": {
                    "variant": {"enum": [v.value for v in Variant]},
                    "dataset": {"type": "string"},
                    "seeds": {"type": "array", "items": {"type": "integer"}, "uniqueItems": True, "minItems": 1},
                    "accuracies": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 100}},
                    "mean": {"type": "number"},
                    "std": {"type": "number", "minimum": 0},
                    "noise_rate": {"type": "number"},
                    "achieved_noise_rates": {"type": "array", "items": {"type": "number"}},
                    "param": {"enum": ["K", "alpha"]},
                    "value": {"type": "number"},
                    "wall_time": {"type": "number"},
                },
            },
        },
    },
}


@dataclass
class ExperimentResult:
    """Accuracies are test-set percentages, one per seed."""

    variant: str
    dataset: str
    seeds: list[int]
    accuracies: list[float]
    mean: float = 0.0
    std: float = 0.0
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        self.mean, self.std = aggregate(self.accuracies)

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "variant": self.variant,
            "dataset": self.dataset,
            "seeds": list(self.seeds),
            "accuracies": list(self.accuracies),
            "mean": self.mean,
            "std": self.std,
            **self.extra,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


def aggregate(values) -> tuple[float, float]:
    """Mean and population standard deviation (0 for a single value)."""
    values = list(values)
    if not values:
        raise ValueError("no values to aggregate")
    return statistics.fmean(values), statistics.pstdev(values)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1")
    return n


def _one_run(args) -> tuple[float, float | None]:
    bundle, hp, variant, seed, noise_rate = args
    achieved = None
    if noise_rate is not None:
        bundle = bundle.with_graph(inject_structure_noise(bundle.graph, bundle.labels, noise_rate, seed))
        achieved = structure_noise_rate(bundle.graph, bundle.labels)
    split = generate_split(bundle, hp.per_class_train, hp.val_size, seed)
    _, log = train(bundle, hp.replace(seed=seed), variant, split)
    return 100.0 * log.test_acc, achieved


def run_seeds(
    bundle: GraphBundle,
    hp: HyperParams,
    variant,
    seeds,
    noise_rate: float | None = None,
    workers: int | None = None,
) -> ExperimentResult:
    """Train ``variant`` once per seed on a fresh random split."""
    variant = parse_variant(variant)
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    workers = worker_count() if workers is None else workers
    jobs = [(bundle, hp, variant, s, noise_rate) for s in seeds]
    start = time.perf_counter()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            outcomes = list(pool.map(_one_run, jobs))
    else:
        outcomes = [_one_run(j) for j in jobs]
    elapsed = time.perf_counter() - start
    extra = {}
    if noise_rate is not None:
        extra = {"noise_rate": noise_rate, "achieved_noise_rates": [a for _, a in outcomes]}
    return ExperimentResult(variant.value, bundle.name, seeds, [acc for acc, _ in outcomes], wall_time=elapsed, extra=extra)


def seed_list(base_seed: int, n_seeds: int) -> list[int]:
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    return [base_seed + i for i in range(n_seeds)]


def benchmark(bundle, hp, variants, seeds, workers=None) -> list[ExperimentResult]:
    return [run_seeds(bundle, hp, v, seeds, workers=workers) for v in variants]


def ablation(bundle, hp, seeds, workers=None) -> list[ExperimentResult]:
    variants = (Variant.PTS, Variant.PAMT0, Variant.PAMT1, Variant.PAMT)
    return benchmark(bundle, hp, variants, seeds, workers)


def noise_sweep(bundle, hp, variants, rates, seeds, workers=None) -> list[ExperimentResult]:
    """One result per (rate, variant); every rate must be at least the graph's own noise rate."""
    current = structure_noise_rate(bundle.graph, bundle.labels)
    for r in rates:
        if r < current - 1e-12:
            raise ValueError(f"cannot denoise: rate {r} is below the dataset's natural rate {current:.4f}")
    return [run_seeds(bundle, hp, v, seeds, noise_rate=r, workers=workers) for r in rates for v in variants]


def validate_sweep_values(param: str, values) -> list:
    if param == "K":
        out = []
        for v in values:
            if float(v) != int(float(v)) or int(float(v)) < 1:
                raise ValueError(f"illegal K value {v}: must be a positive integer")
            out.append(int(float(v)))
        return out
    if param == "alpha":
        out = [float(v) for v in values]
        for v in out:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"illegal alpha value {v}: must lie in [0, 1]")
        return out
    raise ValueError(f"unknown sweep parameter {param!r} (choose K or alpha)")


def param_sweep(bundle, hp, param, values, seeds, variant=Variant.PAMT, workers=None) -> list[ExperimentResult]:
    results = []
    for v in validate_sweep_values(param, values):
        res = run_seeds(bundle, hp.replace(**{param: v}), variant, seeds, workers=workers)
        res.extra = {"param": param, "value": v}
        results.append(res)
    return results


def results_document(command: str, dataset: str, base_seed: int, hp: HyperParams, results, timing=False, **fields) -> dict:
    doc = {
        "schema": SCHEMA_NAME,
        "version": SCHEMA_VERSION,
        "command": command,
        "dataset": dataset,
        "base_seed": base_seed,
        "config": hp.to_dict(),
        **fields,
        "results": [r.to_dict(timing) for r in results],
    }
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def format_table(results, timing: bool = False) -> str:
    """Aligned text table, one row per result."""
    header = ["variant", "setting", "mean", "std", "n"]
    if timing:
        header.append("time[s]")
    rows = []
    for r in results:
        if "noise_rate" in r.extra:
            setting = f"noise={r.extra['noise_rate']:g}"
        elif "param" in r.extra:
            setting = f"{r.extra['param']}={r.extra['value']:g}"
        else:
            setting = "-"
        row = [r.variant, setting, f"{r.mean:.2f}", f"{r.std:.2f}", str(len(r.seeds))]
        if timing:
            row.append(f"{r.wall_time:.1f}")
        rows.append(row)
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join(lines) + "\n"


def reaggregate(doc: dict) -> list[tuple[float, float]]:
    """Recompute (mean, std) of every result row from its per-seed accuracies."""
    return [aggregate(r["accuracies"]) for r in doc["results"]]
