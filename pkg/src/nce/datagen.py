"""Gaussian-blob benchmarks with controlled label noise."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .types import Dataset


def class_means(num_classes, dim, radius=1.0, seed=0):
    """Class centers drawn uniformly on the sphere of the given radius."""
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((num_classes, dim))
    return radius * m / np.linalg.norm(m, axis=1, keepdims=True)


def make_blobs(num_classes, per_class_n, dim, cluster_std, seed=0, radius=1.0, means=None):
    """Isotropic Gaussian clusters around class centers on a sphere.

    Samples are ordered class by class. ``cluster_std / radius`` controls the
    overlap; pass ``means`` to draw a second split (e.g. a test set) around
    the same centers.
    """
    if num_classes < 2 or dim < 1:
        raise ValueError("need num_classes >= 2 and dim >= 1")
    rng = np.random.default_rng(seed)
    if means is None:
        means = class_means(num_classes, dim, radius, rng.integers(2**32))
    labels = np.repeat(np.arange(num_classes), per_class_n)
    X = means[labels] + cluster_std * rng.standard_normal((labels.size, dim))
    return Dataset(X, labels, num_classes, true_labels=labels)


def make_blob_split(num_classes, train_per_class, test_per_class, dim, cluster_std, seed=0,
                    radius=1.0):
    """Train and test sets sharing the same class centers."""
    means = class_means(num_classes, dim, radius, seed)
    train = make_blobs(num_classes, train_per_class, dim, cluster_std, seed + 1, means=means)
    test = make_blobs(num_classes, test_per_class, dim, cluster_std, seed + 2, means=means)
    return train, test


@dataclass(frozen=True)
class NoiseSpec:
    """Label-noise recipe.

    ``symmetric``: ``round(ratio * N)`` samples chosen uniformly get a label drawn
    uniformly from the other C - 1 classes (``inclusive=True`` draws from all C
    classes instead, so some picks keep their label).
    ``asymmetric``: ``round(ratio * n_c)`` samples of each class c flip to
    ``asym_map[c]``; the default map is c -> (c + 1) mod C.
    """

    noise_type: str = "symmetric"
    ratio: float = 0.0
    asym_map: Optional[tuple] = None
    inclusive: bool = False

    def __post_init__(self):
        if self.noise_type not in ("symmetric", "asymmetric"):
            raise ValueError(f"unknown noise type {self.noise_type!r}")
        if not 0 <= self.ratio < 1:
            raise ValueError("noise ratio must lie in [0, 1)")

    @classmethod
    def symmetric(cls, ratio, inclusive=False):
        return cls("symmetric", ratio, inclusive=inclusive)

    @classmethod
    def asymmetric(cls, ratio, num_classes, asym_map=None):
        """Asymmetric spec; the map defaults to the cyclic shift c -> (c + 1) mod C."""
        return cls("asymmetric", ratio, tuple(asym_map or cyclic_map(num_classes)))


def inject_noise(dataset: Dataset, spec: NoiseSpec, seed=0):
    """Corrupt given labels per ``spec``; features and true labels are untouched.

    Returns ``(noisy_dataset, realized_ratio)`` where the realized ratio is the
    fraction of samples whose given label now differs from the true one.
    """
    rng = np.random.default_rng(seed)
    C = dataset.num_classes
    truth = dataset.true_labels if dataset.has_true_labels else dataset.given_labels
    original = dataset.given_labels
    labels = original.copy()

    if spec.noise_type == "symmetric":
        n_flip = int(round(spec.ratio * len(labels)))
        picked = rng.choice(len(labels), size=n_flip, replace=False)
        if spec.inclusive:
            labels[picked] = rng.integers(0, C, size=n_flip)
        else:
            # shift by 1..C-1: uniform over the other classes
            labels[picked] = (labels[picked] + rng.integers(1, C, size=n_flip)) % C
    else:
        if spec.asym_map is None:
            if C > 2:
                raise ValueError("asymmetric noise with more than 2 classes needs asym_map")
            mapping = np.array([1, 0])
        else:
            mapping = np.asarray(spec.asym_map, dtype=np.int64)
            if mapping.shape != (C,) or mapping.min() < 0 or mapping.max() >= C:
                raise ValueError("asym_map must map every class to a class index")
        for c in range(C):
            members = np.flatnonzero(original == c)
            n_flip = int(round(spec.ratio * members.size))
            picked = np.sort(rng.choice(members, size=n_flip, replace=False))
            labels[picked] = mapping[c]

    noisy = Dataset(dataset.features, labels, C, true_labels=truth)
    realized = float(np.mean(labels != truth))
    return noisy, realized


def cyclic_map(num_classes):
    return tuple((c + 1) % num_classes for c in range(num_classes))
