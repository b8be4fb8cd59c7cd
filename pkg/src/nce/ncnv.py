"""Neighborhood collective noise verification.

Each sample's given label is compared (JS divergence) against the model's
predictions at its K nearest neighbors, never at the sample itself. A mean
divergence of at least ``tau`` marks the label as noisy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergence import js_to_onehot
from .errors import DegenerateVectorError, EmptyNeighborhoodError
from .simindex import SimilarityIndex, knn_batch
from .types import Dataset, check_distribution

DEFAULT_TAU = 0.75


@dataclass(frozen=True)
class VerificationReport:
    scores: np.ndarray
    threshold: float
    clean_ids: np.ndarray
    noisy_ids: np.ndarray
    neighbors: np.ndarray = None  # (N, K') neighbor ids, kept for audit

    @classmethod
    def from_scores(cls, scores, tau, neighbors=None):
        scores = np.asarray(scores, dtype=np.float64)
        noisy = scores >= tau
        return cls(scores, float(tau), np.flatnonzero(~noisy), np.flatnonzero(noisy), neighbors)

    def rethreshold(self, tau) -> "VerificationReport":
        return VerificationReport.from_scores(self.scores, tau, self.neighbors)


def verification_score(candidate_id, given_label, neighbor_predictions) -> float:
    """Mean JS divergence between one-hot(given_label) and each neighbor's prediction."""
    preds = np.atleast_2d(np.asarray(neighbor_predictions, dtype=np.float64))
    if preds.size == 0:
        raise EmptyNeighborhoodError(f"sample {candidate_id} has no neighbors")
    check_distribution(preds)
    return float(js_to_onehot(preds, given_label).mean())


def verification_scores(given_labels, predictions, neighbors):
    """Vectorized scores: row i averages over predictions[neighbors[i]]."""
    if neighbors.shape[1] == 0:
        raise EmptyNeighborhoodError("empty neighborhoods")
    return js_to_onehot(predictions[neighbors], np.asarray(given_labels)[:, None]).mean(axis=1)


def verify(dataset: Dataset, predictions, index: SimilarityIndex, K, tau=DEFAULT_TAU):
    """Score every sample against its K nearest other samples and split at ``tau``.

    ``predictions`` is an (N, C) snapshot of p(y|x) taken before the pass; the
    index must cover the whole training set. Samples scoring exactly ``tau``
    are noisy.
    """
    preds = check_distribution(predictions)
    if preds.shape != (dataset.n_samples, dataset.num_classes):
        raise ValueError(
            f"predictions shape {preds.shape} does not match dataset "
            f"({dataset.n_samples}, {dataset.num_classes})"
        )
    ids = np.arange(dataset.n_samples)
    try:
        neighbors, _ = knn_batch(index, ids, K, exclude_self=True)
    except DegenerateVectorError as err:
        raise DegenerateVectorError(
            f"cannot verify sample {err.sample_id}: {err}", sample_id=err.sample_id
        ) from err
    scores = verification_scores(dataset.given_labels, preds, neighbors)
    return VerificationReport.from_scores(scores, tau, neighbors)


def report_rows(report: VerificationReport):
    """CSV rows: sample_id, s_ver, verdict."""
    noisy = report.scores >= report.threshold
    return [
        (i, float(s), "noisy" if flag else "clean")
        for i, (s, flag) in enumerate(zip(report.scores, noisy))
    ]
