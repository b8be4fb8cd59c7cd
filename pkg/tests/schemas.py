"""JSON Schemas for every report the package writes, plus a CSV-row adapter."""

import csv

import jsonschema

_prob = {"type": ["number", "null"], "minimum": 0, "maximum": 1}
_metadata = {"type": "object", "required": ["timestamp"],
             "properties": {"timestamp": {"type": "string"}}}

VERIFICATION_ROW = {
    "type": "object",
    "required": ["sample_id", "s_ver", "verdict"],
    "additionalProperties": False,
    "properties": {
        "sample_id": {"type": "integer", "minimum": 0},
        "s_ver": {"type": "number", "minimum": 0, "maximum": 1},
        "verdict": {"enum": ["clean", "noisy"]},
    },
}

CORRECTION_ROW = {
    "type": "object",
    "required": ["sample_id", "s_cor", "verdict", "new_label"],
    "additionalProperties": False,
    "properties": {
        "sample_id": {"type": "integer", "minimum": 0},
        "s_cor": {"type": "number", "minimum": 0, "maximum": 1},
        "verdict": {"enum": ["relabeled", "dropped"]},
        "new_label": {"type": ["integer", "null"], "minimum": 0},
    },
    "if": {"properties": {"verdict": {"const": "relabeled"}}},
    "then": {"properties": {"new_label": {"type": "integer"}}},
    "else": {"properties": {"new_label": {"type": "null"}}},
}

METRICS = {
    "type": "object",
    "required": ["n_samples", "test_accuracy", "per_class_accuracy", "metadata"],
    "properties": {
        "n_samples": {"type": "integer", "minimum": 1},
        "test_accuracy": _prob,
        "per_class_accuracy": {"type": "object", "additionalProperties": _prob},
        "metadata": _metadata,
    },
}

EPOCH = {
    "type": "object",
    "required": ["epoch", "phase", "loss"],
    "properties": {
        "epoch": {"type": "integer", "minimum": 1},
        "phase": {"enum": ["warmup", "nce", "fallback"]},
        "loss": {"type": "number", "minimum": 0},
        "test_accuracy": _prob,
        "ident_noisy_precision": _prob,
        "ident_noisy_recall": _prob,
        "correction_accuracy": _prob,
        "correction_coverage": _prob,
    },
}

TRACE = {
    "type": "object",
    "required": ["config", "epochs", "metadata"],
    "properties": {
        "config": {"type": "object"},
        "epochs": {"type": "array", "items": EPOCH, "minItems": 1},
        "metadata": _metadata,
    },
}

BENCH = {
    "type": "object",
    "required": ["preset", "seeds", "config", "cells", "traces", "metadata"],
    "properties": {
        "cells": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["test_accuracy", "realized_noise"],
                "properties": {"test_accuracy": {
                    "type": "object", "required": ["mean", "std", "values"],
                    "properties": {"mean": _prob, "values": {"type": "array", "items": _prob}},
                }},
            },
        },
        "traces": {"type": "object", "additionalProperties": {"type": "array", "items": EPOCH}},
        "metadata": _metadata,
    },
}


def _coerce(value, spec):
    if value == "":
        return None
    kinds = spec.get("type", "string")
    kinds = kinds if isinstance(kinds, list) else [kinds]
    if "integer" in kinds:
        return int(value)
    if "number" in kinds:
        return float(value)
    return value


def validate_csv(path, row_schema):
    """Validate every row of a report CSV; returns the parsed rows."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == row_schema["required"]
        rows = []
        for raw in reader:
            row = {k: _coerce(v, row_schema["properties"][k]) for k, v in raw.items()}
            jsonschema.validate(row, row_schema)
            rows.append(row)
    return rows


def validate(doc, schema):
    jsonschema.validate(doc, schema)
