"""Desk-scale experiment presets: noisy-label benchmark and ablations.

``table1-desk`` compares plain cross-entropy training against the full
method on 4-class Gaussian blobs under several noise settings, plus a
clean-label ceiling. ``ablation-desk`` runs the component ablations on the
sym-0.5 setting. Results are plain dicts ready for JSON.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import evalkit
from .datagen import NoiseSpec, inject_noise, make_blob_split
from .finetune import cross_entropy_baseline, run_pipeline
from .types import Config

# Blob std giving roughly 95% clean-label test accuracy at C=4, d=16, radius 1.
BLOB_STD = 0.32


@dataclass(frozen=True)
class Setting:
    name: str
    noise_type: str
    ratio: float
    inclusive: bool = False

    def spec(self, num_classes):
        if self.noise_type == "symmetric":
            return NoiseSpec.symmetric(self.ratio, inclusive=self.inclusive)
        return NoiseSpec.asymmetric(self.ratio, num_classes)


@dataclass(frozen=True)
class Preset:
    name: str
    settings: tuple
    arms: tuple
    num_classes: int = 4
    dim: int = 16
    train_per_class: int = 500
    test_per_class: int = 250
    cluster_std: float = BLOB_STD
    config: Config = field(default_factory=Config)
    with_ceiling: bool = True


SETTINGS = {
    "sym-0.2": Setting("sym-0.2", "symmetric", 0.2),
    "sym-0.5": Setting("sym-0.5", "symmetric", 0.5),
    "sym-0.8": Setting("sym-0.8", "symmetric", 0.8),
    "asym-0.4": Setting("asym-0.4", "asymmetric", 0.4),
    # new label drawn from all C classes, so the true class keeps some mass
    "sym-0.8-incl": Setting("sym-0.8-incl", "symmetric", 0.8, inclusive=True),
}

# name -> config overrides; "ce" is the cross-entropy-only baseline
ARMS = {
    "ce": None,
    "nce": {},
    "nce-no-lab": {"use_lab_loss": False},
    "nce-ce-not-mixup": {"use_mixup": False},
    "nce-unperturbed": {"perturbation_sigma": 0.0, "perturbation_dropout": 0.0},
    "nce-ct": {"correction": "ct"},
}

PRESETS = {
    "table1-desk": Preset(
        "table1-desk",
        settings=tuple(SETTINGS[k] for k in ("sym-0.2", "sym-0.5", "sym-0.8", "asym-0.4")),
        arms=("ce", "nce"),
    ),
    "ablation-desk": Preset(
        "ablation-desk",
        settings=(SETTINGS["sym-0.5"],),
        arms=("nce", "nce-no-lab", "nce-ce-not-mixup", "nce-unperturbed", "nce-ct"),
        with_ceiling=False,
    ),
    "sym80-inclusive-desk": Preset(
        "sym80-inclusive-desk",
        settings=(SETTINGS["sym-0.8-incl"],),
        arms=("ce", "nce"),
        with_ceiling=False,
    ),
}


def make_data(preset: Preset, setting: Setting, seed):
    train, test = make_blob_split(preset.num_classes, preset.train_per_class,
                                  preset.test_per_class, preset.dim, preset.cluster_std,
                                  seed=1000 * seed)
    if setting is None:
        return train, test, 0.0
    noisy, realized = inject_noise(train, setting.spec(preset.num_classes), seed=1000 * seed + 7)
    return noisy, test, realized


def run_arm(arm, train, test, config: Config):
    if arm == "ce":
        result = cross_entropy_baseline(train, config, heldout=test)
    else:
        result = run_pipeline(train, config.replace(**ARMS[arm]), heldout=test)
    return result


def _summary(values):
    arr = np.asarray(values, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std()), "values": arr.tolist()}


def run_preset(preset, seeds=3, config: Config = None, log=print):
    """Run every (setting, arm, seed) cell; returns a JSON-ready results dict.

    Per-run traces are included so two runs can be compared byte for byte.
    Wall-clock time lives only under ``metadata``.
    """
    if isinstance(preset, str):
        preset = PRESETS[preset]
    base = config or preset.config
    started = time.time()
    cells = {}
    traces = {}
    jobs = [(s, a) for s in preset.settings for a in preset.arms]
    if preset.with_ceiling:
        jobs.insert(0, (None, "ce"))
    for setting, arm in jobs:
        sname = "clean" if setting is None else setting.name
        key = f"{sname}/{arm}"
        accs, realized = [], []
        for seed in range(seeds):
            train, test, r = make_data(preset, setting, seed)
            result = run_arm(arm, train, test, base.replace(seed=seed))
            acc = evalkit.test_accuracy(result.model, test)
            accs.append(acc)
            realized.append(r)
            traces[f"{key}/seed{seed}"] = result.trace()
            log(f"{key} seed={seed} test_acc={acc:.4f}")
        cells[key] = {"test_accuracy": _summary(accs), "realized_noise": realized}
    return {
        "preset": preset.name,
        "seeds": seeds,
        "config": base.as_dict(),
        "data": {
            "num_classes": preset.num_classes, "dim": preset.dim,
            "train_per_class": preset.train_per_class, "test_per_class": preset.test_per_class,
            "cluster_std": preset.cluster_std,
        },
        "cells": cells,
        "traces": traces,
        "metadata": {"elapsed_seconds": time.time() - started,
                     "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")},
    }


def mean_acc(results, key):
    return results["cells"][key]["test_accuracy"]["mean"]


def table1_checks(results):
    """Pass/fail verdicts for the benchmark's headline requirements."""
    checks = {}
    cells = results["cells"]
    for name in ("sym-0.5", "sym-0.8"):
        if f"{name}/nce" not in cells or f"{name}/ce" not in cells:
            continue
        gap = mean_acc(results, f"{name}/nce") - mean_acc(results, f"{name}/ce")
        checks[f"{name} gap >= 10 points"] = {"value": 100 * gap, "pass": gap >= 0.10}
    if "clean/ce" in cells:
        ceiling = mean_acc(results, "clean/ce")
        checks["clean ceiling >= 93%"] = {"value": 100 * ceiling, "pass": ceiling >= 0.93}
        if "sym-0.2/nce" in cells:
            shortfall = ceiling - mean_acc(results, "sym-0.2/nce")
            checks["sym-0.2 within 2 points of ceiling"] = {"value": 100 * shortfall,
                                                             "pass": shortfall <= 0.02}
    return checks


def ablation_checks(results, setting="sym-0.5"):
    full = mean_acc(results, f"{setting}/nce")
    checks = {}
    for arm in ("nce-no-lab", "nce-ce-not-mixup"):
        if f"{setting}/{arm}" not in results["cells"]:
            continue
        drop = full - mean_acc(results, f"{setting}/{arm}")
        checks[f"{arm} drop > 1 point"] = {"value": 100 * drop, "pass": drop > 0.01}
    for arm in ("nce-unperturbed", "nce-ct"):
        key = f"{setting}/{arm}"
        if key in results["cells"]:
            checks[f"{arm} (reported)"] = {"value": 100 * (full - mean_acc(results, key)),
                                           "pass": True}
    return checks
