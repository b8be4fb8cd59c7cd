"""File formats: dataset CSV, key = value config files, JSON checkpoints, reports.

Floats are written with ``repr``, the shortest decimal that parses back to
the same double, so every file round-trips bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import ncnv, nclc
from .classifier import Classifier
from .errors import ConfigError, SchemaError
from .types import Config, Dataset, validate_dataset

CHECKPOINT_FORMAT = "nce-checkpoint/1"


def _fmt(x):
    return repr(float(x))


def write_dataset(dataset: Dataset, path):
    d = dataset.dim
    header = [f"f{j}" for j in range(d)] + ["given_label"]
    truth = dataset.true_labels if dataset.has_true_labels else None
    if truth is not None:
        header.append("true_label")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i, row in enumerate(dataset.features):
            cells = [_fmt(v) for v in row] + [str(int(dataset.given_labels[i]))]
            if truth is not None:
                cells.append(str(int(truth[i])))
            fh.write(",".join(cells) + "\n")


def read_dataset(path, num_classes=None) -> Dataset:
    """Parse a dataset CSV; ``num_classes`` defaults to the largest label + 1 (at least 2)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if "given_label" not in header:
            raise SchemaError(f"{path}: line 1: missing column 'given_label'")
        g = header.index("given_label")
        expected = [f"f{j}" for j in range(g)]
        if g == 0 or header[:g] != expected:
            raise SchemaError(f"{path}: line 1: feature columns must be named {','.join(expected) or 'f0,...'}")
        rest = header[g + 1:]
        if rest not in ([], ["true_label"]):
            raise SchemaError(f"{path}: line 1: unexpected columns after given_label: {rest}")
        has_true = bool(rest)
        width = len(header)

        feats, given, true = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width:
                raise SchemaError(f"{path}: line {lineno}: expected {width} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row[:g]]
                labels = [int(v) for v in row[g:]]
            except ValueError as err:
                raise SchemaError(f"{path}: line {lineno}: {err}") from None
            if not all(math.isfinite(v) for v in vals):
                raise SchemaError(f"{path}: line {lineno}: non-finite feature value")
            feats.append(vals)
            given.append(labels[0])
            if has_true:
                true.append(labels[1])

    if not feats:
        raise SchemaError(f"{path}: no data rows")
    if num_classes is None:
        num_classes = max(2, max(given + true) + 1)
    return validate_dataset(np.array(feats), given, num_classes, true if has_true else None)


def _parse_value(raw, kind, key):
    if kind in ("bool", bool):
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if kind in ("int", int):
            return int(raw)
        if kind in ("float", float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return raw


def parse_config(text, base: Config = None) -> Config:
    """Parse ``key = value`` lines (``#`` starts a comment) over ``base`` defaults."""
    kinds = {f.name: f.type for f in fields(Config)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in kinds:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        values[key] = _parse_value(raw, kinds[key], key)
    return (base or Config()).replace(**values)


def read_config(path, base: Config = None) -> Config:
    return parse_config(Path(path).read_text(encoding="utf-8"), base)


def format_config(config: Config) -> str:
    lines = []
    for key, value in config.as_dict().items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = _fmt(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def write_config(config: Config, path):
    Path(path).write_text(format_config(config), encoding="utf-8")


def save_checkpoint(model: Classifier, path):
    payload = {
        "format": CHECKPOINT_FORMAT,
        "hidden_dim": model.hidden_dim,
        "params": {
            name: {"shape": list(arr.shape), "data": [float(v) for v in arr.ravel()]}
            for name, arr in model.params.items()
        },
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_checkpoint(path) -> Classifier:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise SchemaError(f"{path}: not a {CHECKPOINT_FORMAT} file")
    params = {}
    for name, entry in payload["params"].items():
        arr = np.array(entry["data"], dtype=np.float64)
        if arr.size != int(np.prod(entry["shape"])):
            raise SchemaError(f"{path}: parameter {name} has {arr.size} values for shape {entry['shape']}")
        params[name] = arr.reshape(entry["shape"])
    hidden = int(payload["hidden_dim"])
    expected = {"W", "b"} if hidden == 0 else {"W1", "b1", "W2", "b2"}
    if set(params) != expected:
        raise SchemaError(f"{path}: expected parameters {sorted(expected)}, got {sorted(params)}")
    return Classifier(params, hidden)


def _write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def write_verification_report(report, path):
    _write_rows(path, ["sample_id", "s_ver", "verdict"], ncnv.report_rows(report))


def write_correction_report(report, path):
    _write_rows(path, ["sample_id", "s_cor", "verdict", "new_label"], nclc.report_rows(report))


def write_neighbors(index_ids, neighbor_ids, similarities, path):
    """Debug dump of (query, rank, neighbor, similarity) rows."""
    rows = [
        (int(q), r, int(n), float(s))
        for q, ns, ss in zip(index_ids, neighbor_ids, similarities)
        for r, (n, s) in enumerate(zip(ns, ss))
    ]
    _write_rows(path, ["query_id", "rank", "neighbor_id", "similarity"], rows)


def write_json(obj, path, timestamp=True):
    """Write JSON; a ``metadata.timestamp`` field is the only time-dependent content."""
    if timestamp:
        obj = dict(obj)
        meta = dict(obj.get("metadata", {}))
        meta.setdefault("timestamp", time.strftime("%Y-%m-%dT%H:%M:%S"))
        obj["metadata"] = meta
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def trace_document(result, config: Config):
    return {"config": config.as_dict(), "epochs": result.trace()}


def strip_metadata(doc):
    """Copy of a JSON document without its metadata block, for reproducibility diffs."""
    return {k: v for k, v in doc.items() if k != "metadata"}
