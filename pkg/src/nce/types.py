"""Shared domain types: datasets, label distributions, neighbor sets, partitions, config."""

from __future__ import annotations

import sys
from dataclasses import dataclass, fields
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    ConfigError,
    DatasetValidationError,
    InvalidLabelError,
    ShapeError,
    TrueLabelAccessError,
)

SIMPLEX_ATOL = 1e-9

# Modules that implement the method itself. They must never see hidden labels.
_ALGORITHM_MODULES = frozenset(
    f"nce.{name}" for name in ("simindex", "divergence", "ncnv", "nclc", "classifier", "finetune")
)


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


class Dataset:
    """Feature matrix plus given (possibly noisy) labels.

    ``true_labels`` is carried for evaluation only. Reading it from one of the
    algorithm modules raises ``TrueLabelAccessError``.
    """

    __slots__ = ("_features", "_given", "_true", "_num_classes")

    def __init__(self, features, given_labels, num_classes, true_labels=None):
        self._features = _frozen(np.asarray(features, dtype=np.float64))
        self._given = _frozen(np.asarray(given_labels, dtype=np.int64))
        self._true = None if true_labels is None else _frozen(np.asarray(true_labels, dtype=np.int64))
        self._num_classes = int(num_classes)

    @property
    def features(self) -> np.ndarray:
        return self._features

    @property
    def given_labels(self) -> np.ndarray:
        return self._given

    @property
    def num_classes(self) -> int:
        return self._num_classes

    @property
    def has_true_labels(self) -> bool:
        return self._true is not None

    @property
    def true_labels(self) -> Optional[np.ndarray]:
        caller = sys._getframe(1).f_globals.get("__name__", "")
        if caller in _ALGORITHM_MODULES:
            raise TrueLabelAccessError(f"{caller} may not read true_labels")
        return self._true

    @property
    def n_samples(self) -> int:
        return self._features.shape[0]

    @property
    def dim(self) -> int:
        return self._features.shape[1]

    def __len__(self):
        return self.n_samples

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if self._num_classes != other._num_classes:
            return False
        if (self._true is None) != (other._true is None):
            return False
        same_true = self._true is None or np.array_equal(self._true, other._true)
        return (
            same_true
            and np.array_equal(self._given, other._given)
            and self._features.shape == other._features.shape
            and np.array_equal(self._features, other._features)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"Dataset(n={self.n_samples}, d={self.dim}, C={self._num_classes}, "
            f"true_labels={'yes' if self._true is not None else 'no'})"
        )

    def with_given_labels(self, given_labels) -> "Dataset":
        return Dataset(self._features, given_labels, self._num_classes, self._true)

    def subset(self, ids) -> "Dataset":
        ids = np.asarray(ids, dtype=np.int64)
        true = None if self._true is None else self._true[ids]
        return Dataset(self._features[ids], self._given[ids], self._num_classes, true)


def one_hot(label, num_classes):
    """One-hot label distribution of length ``num_classes``."""
    if not 0 <= label < num_classes:
        raise InvalidLabelError(f"label {label} outside [0, {num_classes})")
    p = np.zeros(num_classes)
    p[label] = 1.0
    return p


def one_hot_rows(labels, num_classes):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise InvalidLabelError(f"labels outside [0, {num_classes})")
    out = np.zeros((labels.shape[0], num_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def check_distribution(probs, atol=SIMPLEX_ATOL):
    """Validate a label distribution (or a stack of them, one per row)."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim not in (1, 2) or p.shape[-1] == 0:
        raise ShapeError(f"expected a length-C vector or N x C matrix, got shape {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("label distribution has negative or non-finite entries")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > atol):
        raise ValueError("label distribution does not sum to 1")
    return p


def validate_dataset(features, labels, num_classes, true_labels=None) -> Dataset:
    """Build a Dataset from raw inputs, collecting every violation before raising."""
    if isinstance(features, Dataset):
        ds = features
        return Dataset(ds.features, ds.given_labels, ds.num_classes, ds._true)

    violations = []
    if num_classes < 2:
        violations.append((None, f"num_classes must be >= 2, got {num_classes}"))

    rows = list(features) if not isinstance(features, np.ndarray) else features
    if len(rows) == 0:
        raise DatasetValidationError(violations + [(None, "dataset is empty (N = 0)")])

    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        mat = rows.astype(np.float64)
    else:
        lengths = [len(np.atleast_1d(r)) for r in rows]
        width = lengths[0]
        for i, n in enumerate(lengths):
            if n != width:
                violations.append((i, f"ragged row: {n} values, expected {width}"))
        if violations and any(r is not None for r, _ in violations):
            raise DatasetValidationError(violations)
        mat = np.array([np.atleast_1d(r) for r in rows], dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] < 1:
        violations.append((None, f"features must be N x d with d >= 1, got shape {mat.shape}"))
        raise DatasetValidationError(violations)

    bad_rows = np.flatnonzero(~np.all(np.isfinite(mat), axis=1))
    violations.extend((int(i), "non-finite feature value") for i in bad_rows)

    def _check_labels(values, name):
        arr = np.asarray(values)
        if arr.shape != (mat.shape[0],):
            violations.append((None, f"{name} has length {arr.size}, expected {mat.shape[0]}"))
            return None
        for i, v in enumerate(arr):
            if float(v) != int(v) or not 0 <= int(v) < num_classes:
                violations.append((i, f"{name} {v} outside [0, {num_classes})"))
        return arr.astype(np.int64)

    given = _check_labels(labels, "label")
    true = None if true_labels is None else _check_labels(true_labels, "true_label")
    if violations:
        raise DatasetValidationError(violations)
    return Dataset(mat, given, num_classes, true)


class NeighborSet(NamedTuple):
    indices: np.ndarray
    similarities: np.ndarray


@dataclass(frozen=True)
class Partition:
    """Clean/noisy/relabeled decomposition of the training set for one epoch."""

    clean: np.ndarray
    noisy: np.ndarray
    relabeled: np.ndarray  # (m, 2): sample id, corrected label
    dropped: np.ndarray
    ver_scores: np.ndarray
    cor_scores: np.ndarray  # aligned with ``noisy``

    def check(self, n_samples):
        clean, noisy = set(self.clean.tolist()), set(self.noisy.tolist())
        assert not clean & noisy and len(clean | noisy) == n_samples
        relab = set(self.relabeled[:, 0].tolist()) if len(self.relabeled) else set()
        dropped = set(self.dropped.tolist())
        assert not relab & dropped and relab | dropped == noisy
        for s in (self.ver_scores, self.cor_scores):
            assert np.all((s >= 0) & (s <= 1))


@dataclass(frozen=True)
class Config:
    K: int = 20
    tau: float = 0.75
    tau_prime: float = 2e-3
    gamma: float = 1.0
    alpha: float = 4.0
    eta: float = 0.02
    T_wu: int = 10
    T_tr: int = 150
    B: int = 128
    B_prime: int = 128
    seed: int = 0
    perturbation_sigma: float = 0.1
    perturbation_dropout: float = 0.1
    apply_lab_to_clean: bool = False
    hidden_dim: int = 256
    feature_source: str = "raw"
    momentum: float = 0.9
    weight_decay: float = 5e-4
    use_mixup: bool = True
    use_lab_loss: bool = True
    correction: str = "nclc"
    ct_threshold: float = 0.95

    def __post_init__(self):
        problems = []
        if not 0 < self.tau < 1:
            problems.append("tau must lie in (0, 1)")
        if not 0 < self.tau_prime < 1:
            problems.append("tau_prime must lie in (0, 1)")
        if self.K < 1:
            problems.append("K must be >= 1")
        if self.T_wu < 1 or self.T_wu > self.T_tr:
            problems.append("need 1 <= T_wu <= T_tr")
        if self.B < 2:
            problems.append("B must be >= 2")
        if self.B_prime < 1:
            problems.append("B_prime must be >= 1")
        if self.gamma < 0:
            problems.append("gamma must be >= 0")
        if self.alpha <= 0:
            problems.append("alpha must be > 0")
        if self.eta <= 0:
            problems.append("eta must be > 0")
        if self.perturbation_sigma < 0 or not 0 <= self.perturbation_dropout < 1:
            problems.append("perturbation needs sigma >= 0 and 0 <= dropout < 1")
        if self.hidden_dim < 0:
            problems.append("hidden_dim must be >= 0")
        if self.feature_source not in ("raw", "embed"):
            problems.append("feature_source must be 'raw' or 'embed'")
        if self.correction not in ("nclc", "ct"):
            problems.append("correction must be 'nclc' or 'ct'")
        if not 0 <= self.momentum < 1 or self.weight_decay < 0:
            problems.append("need 0 <= momentum < 1 and weight_decay >= 0")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def field_types(cls):
        return {f.name: f.type for f in fields(cls)}

    def replace(self, **changes) -> "Config":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        unknown = set(changes) - set(values)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(changes)
        return Config(**values)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}
