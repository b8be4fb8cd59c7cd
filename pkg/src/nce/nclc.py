"""Neighborhood collective label correction.

A noisy sample is compared (via its own prediction) with the given labels of
its K nearest clean samples. Close agreement (mean JS divergence below
``tau_prime``) earns it a new label from a similarity-weighted vote of those
neighbors; anything else is dropped for the epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .divergence import js_to_onehot
from .errors import EmptyNeighborhoodError, EmptyPoolError
from .ncnv import VerificationReport
from .simindex import build_index, knn_batch
from .types import Dataset, check_distribution

DEFAULT_TAU_PRIME = 2e-3


@dataclass(frozen=True)
class CorrectionReport:
    noisy_ids: np.ndarray
    cor_scores: np.ndarray  # aligned with noisy_ids
    threshold: float
    relabeled: np.ndarray  # (m, 2) rows of (sample_id, new label)
    dropped: np.ndarray
    proposals: np.ndarray = None  # vote winner for every noisy sample, relabeled or not
    weight_traces: dict = field(default=None, repr=False)

    @property
    def relabeled_ids(self):
        return self.relabeled[:, 0]

    @property
    def new_labels(self):
        return self.relabeled[:, 1]

    def rethreshold(self, tau_prime) -> "CorrectionReport":
        keep = self.cor_scores < tau_prime
        relab = np.column_stack([self.noisy_ids[keep], self.proposals[keep]]).astype(np.int64)
        return CorrectionReport(self.noisy_ids, self.cor_scores, float(tau_prime), relab,
                                self.noisy_ids[~keep], self.proposals, self.weight_traces)


def _labels(neighbor_labels):
    labels = np.asarray(neighbor_labels, dtype=np.int64).ravel()
    if labels.size == 0:
        raise EmptyNeighborhoodError("no clean neighbors")
    return labels


def correction_score(candidate_prediction, neighbor_labels) -> float:
    """Mean JS divergence between the candidate's prediction and each neighbor's one-hot label."""
    labels = _labels(neighbor_labels)
    p = check_distribution(candidate_prediction)
    return float(js_to_onehot(p, labels).mean())


def neighbor_weights(candidate_prediction, neighbor_labels):
    """w_k = 1 - JS(prediction, one_hot(y_k))."""
    return 1.0 - js_to_onehot(candidate_prediction, _labels(neighbor_labels))


def correct(candidate_prediction, neighbor_labels, num_classes=None) -> int:
    """Class with the largest weighted vote among the neighbors; ties go to the lowest index."""
    labels = _labels(neighbor_labels)
    p = check_distribution(candidate_prediction)
    C = num_classes or p.shape[-1]
    tally = np.bincount(labels, weights=neighbor_weights(p, labels), minlength=C)
    return int(np.argmax(tally))


def _vote(predictions, neighbor_labels, C):
    # predictions (M, C), neighbor_labels (M, K) -> scores (M,), winners (M,), weights (M, K)
    div = js_to_onehot(predictions[:, None, :], neighbor_labels)
    w = 1.0 - div
    tally = np.zeros((len(predictions), C))
    np.add.at(tally, (np.arange(len(predictions))[:, None], neighbor_labels), w)
    return div.mean(axis=1), np.argmax(tally, axis=1), w


def relabel(dataset: Dataset, verification: VerificationReport, predictions, K,
            tau_prime=DEFAULT_TAU_PRIME, features=None, keep_traces=False) -> CorrectionReport:
    """Relabel or drop every sample flagged noisy by ``verification``.

    Neighbors come from an index built fresh over the clean samples only, on
    ``features`` (defaults to the dataset's own). With fewer than K clean
    samples, all of them are used.
    """
    preds = check_distribution(predictions)
    clean, noisy = verification.clean_ids, verification.noisy_ids
    if clean.size == 0:
        raise EmptyPoolError("no clean samples to correct from")
    feats = dataset.features if features is None else features
    C = dataset.num_classes
    if noisy.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return CorrectionReport(empty, np.empty(0), float(tau_prime),
                                np.empty((0, 2), dtype=np.int64), empty, empty,
                                {} if keep_traces else None)

    index = build_index(feats, subset=clean)
    nbrs, _ = knn_batch(index, noisy, K, exclude_self=False)
    nbr_labels = dataset.given_labels[nbrs]
    scores, winners, weights = _vote(preds[noisy], nbr_labels, C)
    keep = scores < tau_prime
    relab = np.column_stack([noisy[keep], winners[keep]]).astype(np.int64)
    traces = None
    if keep_traces:
        traces = {int(u): list(zip(nbrs[r].tolist(), weights[r].tolist()))
                  for r, u in enumerate(noisy)}
    return CorrectionReport(noisy, scores, float(tau_prime), relab, noisy[~keep], winners, traces)


def relabel_confident(verification: VerificationReport, predictions, threshold=0.95):
    """Confidence-thresholding comparator: relabel noisy samples whose top prediction
    reaches ``threshold`` with that prediction. Scores are reported as 1 - max prob."""
    preds = check_distribution(predictions)
    noisy = verification.noisy_ids
    top = preds[noisy].max(axis=1) if noisy.size else np.empty(0)
    winners = np.argmax(preds[noisy], axis=1) if noisy.size else np.empty(0, dtype=np.int64)
    keep = top >= threshold
    relab = np.column_stack([noisy[keep], winners[keep]]).astype(np.int64).reshape(-1, 2)
    return CorrectionReport(noisy, 1.0 - top, 1.0 - threshold, relab, noisy[~keep], winners)


def report_rows(report: CorrectionReport):
    """CSV rows: sample_id, s_cor, verdict, new_label (empty when dropped)."""
    new = dict(zip(report.relabeled_ids.tolist(), report.new_labels.tolist()))
    rows = []
    for u, s in zip(report.noisy_ids.tolist(), report.cor_scores.tolist()):
        if u in new:
            rows.append((u, s, "relabeled", new[u]))
        else:
            rows.append((u, s, "dropped", ""))
    return rows
