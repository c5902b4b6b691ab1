"""Command-line entry point: ``pamt <command> ...``.

Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import secrets
import sys
from pathlib import Path

from . import harness
from .config import PRESETS, HyperParams, dump_config, load_config
from .data import bundle_from_npz, generate_split, load_bundle, save_bundle
from .graph import structure_noise_rate
from .nn import save_params
from .synthetic import planted_bundle
from .trainer import Variant, parse_variant, train

DATA_ENV = "PAMT_DATA_DIR"

K_SWEEP = [6, 8, 10, 12, 14, 16, 18, 20]
ALPHA_SWEEP = [round(0.05 * i, 2) for i in range(11)]


class UsageError(Exception):
    pass


def resolve_dataset(arg: str) -> Path:
    """A bundle directory path, or a dataset name looked up under ``$PAMT_DATA_DIR`` (default ``./data``)."""
    p = Path(arg)
    if p.is_dir():
        return p
    root = Path(os.environ.get(DATA_ENV, "data"))
    candidate = root / arg
    if candidate.is_dir():
        return candidate
    raise FileNotFoundError(f"missing file: no bundle directory at {p} or {candidate}")


def _hyperparams(args, bundle) -> HyperParams:
    preset = args.preset or (bundle.name if bundle.name in PRESETS else None)
    if args.config:
        hp = load_config(args.config, default_preset=preset)
    elif preset:
        hp = HyperParams.preset(preset)
    else:
        raise UsageError(f"no preset for dataset {bundle.name!r}; pass --preset or --config")
    if args.max_epochs is not None:
        hp = hp.replace(max_epochs=args.max_epochs)
    return hp


def _base_seed(args) -> int:
    return args.seed if args.seed is not None else secrets.randbelow(2**31)


def _variants(raw: str) -> list[Variant]:
    return [parse_variant(v.strip()) for v in raw.split(",") if v.strip()]


def _floats(raw: str) -> list[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {raw!r}") from None


def _emit(args, doc: dict, results) -> None:
    print(harness.format_table(results, timing=args.timing), end="")
    text = harness.dumps(doc)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")


def cmd_train(args) -> int:
    variant = parse_variant(args.variant)
    bundle = load_bundle(resolve_dataset(args.data))
    seed = _base_seed(args)
    hp = _hyperparams(args, bundle).replace(seed=seed)
    split = bundle.split if args.use_bundle_split else None
    if split is None:
        split = generate_split(bundle, hp.per_class_train, hp.val_size, seed)
    params, log = train(bundle, hp, variant, split)

    out = Path(args.out or f"runs/{bundle.name}-{variant.value}-{seed}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "log.jsonl").write_text(log.to_jsonl())
    (out / "config.txt").write_text(dump_config(hp))
    if params is not None:
        save_params(out / "params.json", params, {"dataset": bundle.name, "variant": variant.value, "seed": seed})
    print(f"seed {seed}  best_epoch {log.best_epoch}  test_acc {100 * log.test_acc:.2f}")
    print(f"wrote {out}")
    return 0


def _prepare(args):
    bundle = load_bundle(resolve_dataset(args.data))
    hp = _hyperparams(args, bundle)
    base = _base_seed(args)
    return bundle, hp, base, harness.seed_list(base, args.n_seeds)


def cmd_benchmark(args) -> int:
    bundle, hp, base, seeds = _prepare(args)
    results = harness.benchmark(bundle, hp, _variants(args.variants), seeds)
    _emit(args, harness.results_document("benchmark", bundle.name, base, hp, results, args.timing), results)
    return 0


def cmd_ablate(args) -> int:
    bundle, hp, base, seeds = _prepare(args)
    results = harness.ablation(bundle, hp, seeds)
    _emit(args, harness.results_document("ablate", bundle.name, base, hp, results, args.timing), results)
    return 0


def cmd_noise_sweep(args) -> int:
    bundle, hp, base, seeds = _prepare(args)
    natural = structure_noise_rate(bundle.graph, bundle.labels)
    results = harness.noise_sweep(bundle, hp, _variants(args.variants), _floats(args.rates), seeds)
    doc = harness.results_document("noise-sweep", bundle.name, base, hp, results, args.timing, natural_noise_rate=natural)
    _emit(args, doc, results)
    return 0


def cmd_param_sweep(args) -> int:
    bundle, hp, base, seeds = _prepare(args)
    values = _floats(args.values) if args.values else (K_SWEEP if args.param == "K" else ALPHA_SWEEP)
    results = harness.param_sweep(bundle, hp, args.param, values, seeds, parse_variant(args.variant))
    _emit(args, harness.results_document("param-sweep", bundle.name, base, hp, results, args.timing), results)
    return 0


def cmd_convert(args) -> int:
    bundle = bundle_from_npz(args.npz, name=args.name, lcc=not args.keep_all)
    save_bundle(bundle, args.out)
    s = bundle.stats()
    print(f"{s['name']}: n={s['n']} edges={s['edges']} d={s['d']} c={s['c']} -> {args.out}")
    return 0


def cmd_stats(args) -> int:
    bundle = load_bundle(resolve_dataset(args.data))
    s = bundle.stats()
    rate = structure_noise_rate(bundle.graph, bundle.labels)
    print(f"{s['name']}: n={s['n']} edges={s['edges']} d={s['d']} c={s['c']} noise_rate={rate:.4f}")
    return 0


def cmd_synth(args) -> int:
    bundle = planted_bundle(n=args.n, c=args.c, d=args.d, noise_rate=args.noise, seed=args.seed, name=args.name)
    save_bundle(bundle, args.out)
    print(f"wrote {args.out}: {bundle.stats()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pamt", description="Similarity-masked label propagation then training.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeds=True):
        p.add_argument("--data", required=True, help="bundle directory or dataset name under $PAMT_DATA_DIR")
        p.add_argument("--config", help="flat 'key = value' config file")
        p.add_argument("--preset", choices=sorted(PRESETS), help="hyperparameter preset (default: dataset name)")
        p.add_argument("--seed", type=int, help="base seed; drawn at random and recorded when omitted")
        p.add_argument("--max-epochs", type=int, help="override max_epochs")
        if seeds:
            p.add_argument("--n-seeds", type=int, default=10, help="number of seeds (default 10)")
            p.add_argument("--out", help="results JSON path (default: print to stdout)")
            p.add_argument("--timing", action="store_true", help="record wall time (makes JSON run-dependent)")

    p = sub.add_parser("train", help="train one model and write its log and checkpoint")
    common(p, seeds=False)
    p.add_argument("--variant", default="pamt", help=f"one of {', '.join(v.value for v in Variant)}")
    p.add_argument("--out", help="output directory")
    p.add_argument("--use-bundle-split", action="store_true", help="use splits.json instead of a random split")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("benchmark", help="variants x seeds on fresh random splits")
    common(p)
    p.add_argument("--variants", default="pamt,pts")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("ablate", help="PTS, PAMT0, PAMT1 and PAMT side by side")
    common(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("noise-sweep", help="accuracy after injecting structure noise")
    common(p)
    p.add_argument("--variants", default="pamt,pts")
    p.add_argument("--rates", default="0.3,0.4,0.5,0.6")
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("param-sweep", help="accuracy as K or alpha varies")
    common(p)
    p.add_argument("--param", required=True, choices=["K", "alpha"])
    p.add_argument("--values", help="comma-separated values (default: 6..20 step 2 for K, 0..0.5 step 0.05 for alpha)")
    p.add_argument("--variant", default="pamt")
    p.set_defaults(func=cmd_param_sweep)

    p = sub.add_parser("convert", help="convert a citation-graph .npz archive into a bundle")
    p.add_argument("--npz", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name")
    p.add_argument("--keep-all", action="store_true", help="keep all nodes instead of the largest connected component")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("stats", help="print bundle statistics")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="write a planted-partition bundle")
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="planted")
    p.add_argument("--n", type=int, default=600)
    p.add_argument("--c", type=int, default=4)
    p.add_argument("--d", type=int, default=300)
    p.add_argument("--noise", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, FileNotFoundError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"pamt: error: {msg}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"pamt: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
