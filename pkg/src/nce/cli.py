"""Command-line entry point: ``nce {gen,verify,correct,train,eval,bench}``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import bench, evalkit
from . import io as nio
from .classifier import Classifier, warmup
from .datagen import NoiseSpec, inject_noise, make_blob_split, make_blobs
from .errors import NCEError
from .finetune import _streams, run_pipeline, snapshot
from .nclc import relabel
from .ncnv import verify
from .simindex import build_index
from .types import Config


def _load(args):
    data = nio.read_dataset(args.data)
    config = nio.read_config(args.config) if args.config else Config()
    return data, config


def _warm_model(data, config):
    init_seed, shuffle_rng, _, _ = _streams(config.seed)
    model = Classifier.init(data.dim, data.num_classes, config.hidden_dim, init_seed)
    warmup(model, data, max(config.T_wu - 1, 1), config.eta, config.B,
           momentum=config.momentum, weight_decay=config.weight_decay, rng=shuffle_rng)
    return model


def cmd_gen(args):
    if args.noise_type == "asym" and args.classes > 2 and args.noise_ratio > 0:
        spec = NoiseSpec.asymmetric(args.noise_ratio, args.classes)
    elif args.noise_type == "asym":
        spec = NoiseSpec("asymmetric", args.noise_ratio, (1, 0) if args.classes == 2 else None)
    else:
        spec = NoiseSpec.symmetric(args.noise_ratio, inclusive=args.inclusive)
    if args.test_out:
        train, test = make_blob_split(args.classes, args.per_class, args.test_per_class,
                                      args.dim, args.std, seed=args.seed)
        nio.write_dataset(test, args.test_out)
    else:
        train = make_blobs(args.classes, args.per_class, args.dim, args.std, seed=args.seed)
    noisy, realized = inject_noise(train, spec, seed=args.seed + 1)
    nio.write_dataset(noisy, args.out)
    print(f"wrote {noisy.n_samples} samples to {args.out} (realized noise {realized:.4f})")


def _threshold(override, default, name):
    # Overrides may sit on the closed interval so the boundary cases can be probed.
    if override is None:
        return default
    if not 0.0 <= override <= 1.0:
        raise ValueError(f"--{name} must lie in [0, 1], got {override}")
    return override


def cmd_verify(args):
    data, config = _load(args)
    tau = _threshold(args.tau, config.tau, "tau")
    model = _warm_model(data, config)
    preds, feats = snapshot(model, data, config.feature_source)
    report = verify(data, preds, build_index(feats), config.K, tau)
    nio.write_verification_report(report, args.out)
    print(f"{len(report.noisy_ids)} of {data.n_samples} samples flagged noisy")


def cmd_correct(args):
    data, config = _load(args)
    model = _warm_model(data, config)
    preds, feats = snapshot(model, data, config.feature_source)
    tau = _threshold(args.tau, config.tau, "tau")
    tau_prime = _threshold(args.tau_prime, config.tau_prime, "tau-prime")
    ver = verify(data, preds, build_index(feats), config.K, tau)
    cor = relabel(data, ver, preds, config.K, tau_prime, features=feats)
    nio.write_correction_report(cor, args.out)
    print(f"{len(cor.relabeled)} relabeled, {len(cor.dropped)} dropped")


def cmd_train(args):
    data, config = _load(args)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    heldout = nio.read_dataset(args.test, data.num_classes) if args.test else None
    result = run_pipeline(data, config, heldout=heldout)
    nio.save_checkpoint(result.model, args.out)
    if args.trace:
        nio.write_json(nio.trace_document(result, config), args.trace)
    print(f"trained {config.T_tr} epochs; checkpoint at {args.out}")


def cmd_eval(args):
    data = nio.read_dataset(args.data)
    model = nio.load_checkpoint(args.model)
    labels = data.true_labels if data.has_true_labels else data.given_labels
    pred = model.predict(data.features)
    per_class = {
        str(c): (None if not np.any(labels == c) else float(np.mean(pred[labels == c] == c)))
        for c in range(data.num_classes)
    }
    metrics = {
        "n_samples": data.n_samples,
        "scored_against": "true_label" if data.has_true_labels else "given_label",
        "test_accuracy": evalkit.test_accuracy(model, data.features, labels),
        "per_class_accuracy": per_class,
    }
    nio.write_json(metrics, args.out)
    print(f"accuracy {metrics['test_accuracy']:.4f}")


def cmd_bench(args):
    config = nio.read_config(args.config) if args.config else None
    results = bench.run_preset(args.preset, seeds=args.seeds, config=config,
                               log=lambda m: print(m, file=sys.stderr))
    if args.preset == "table1-desk":
        results["checks"] = bench.table1_checks(results)
    elif args.preset == "ablation-desk":
        results["checks"] = bench.ablation_checks(results)
    nio.write_json(results, args.out)
    for name, check in results.get("checks", {}).items():
        print(f"{'PASS' if check['pass'] else 'FAIL'}  {name}: {check['value']:.2f}")


def build_parser():
    p = argparse.ArgumentParser(prog="nce", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic noisy blob dataset")
    g.add_argument("--classes", type=int, default=4)
    g.add_argument("--per-class", type=int, default=500)
    g.add_argument("--dim", type=int, default=16)
    g.add_argument("--std", type=float, default=bench.BLOB_STD)
    g.add_argument("--noise-type", choices=("sym", "asym"), default="sym")
    g.add_argument("--noise-ratio", type=float, default=0.0)
    g.add_argument("--inclusive", action="store_true",
                   help="symmetric noise may redraw the true class")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--test-out", help="also write a clean test split with the same centers")
    g.add_argument("--test-per-class", type=int, default=250)
    g.set_defaults(func=cmd_gen)

    for name, func, helptext in (
        ("verify", cmd_verify, "warm up, then one noise-verification pass"),
        ("correct", cmd_correct, "warm up, verify, then one label-correction pass"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--data", required=True)
        s.add_argument("--config")
        s.add_argument("--out", required=True)
        s.add_argument("--tau", type=float, help="override the verification threshold")
        s.add_argument("--tau-prime", type=float, help="override the correction threshold")
        s.set_defaults(func=func)

    t = sub.add_parser("train", help="full training run")
    t.add_argument("--data", required=True)
    t.add_argument("--config")
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--trace", help="per-epoch JSON trace path")
    t.add_argument("--test", help="held-out dataset for per-epoch test accuracy")
    t.add_argument("--seed", type=int)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="accuracy of a checkpoint on a dataset")
    e.add_argument("--data", required=True)
    e.add_argument("--model", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="run an experiment preset")
    b.add_argument("--preset", choices=sorted(bench.PRESETS), default="table1-desk")
    b.add_argument("--seeds", type=int, default=3)
    b.add_argument("--config")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (NCEError, OSError, ValueError) as err:
        print(f"nce {args.command}: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
