"""Metrics for noise identification, label correction and classification.

A sample is truly noisy when its given label differs from its true label.
Undefined ratios (0/0) are reported as None, never as 0.
"""

from __future__ import annotations

import numpy as np

from .errors import MissingTrueLabelsError
from .types import Dataset


def _truth(dataset: Dataset):
    if not dataset.has_true_labels:
        raise MissingTrueLabelsError("metrics need a dataset with true labels")
    return dataset.true_labels


def _ratio(num, den):
    return None if den == 0 else num / den


def _prf(pred, actual):
    tp = int(np.sum(pred & actual))
    fp = int(np.sum(pred & ~actual))
    fn = int(np.sum(~pred & actual))
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None if precision is None or recall is None else 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return {"precision": precision, "recall": recall, "f1": f1, "tp": tp, "fp": fp, "fn": fn}


def identification_metrics(report, dataset: Dataset):
    """Precision/recall/F1 of the clean and noisy verdicts plus per-class accuracy.

    Per-class accuracy groups samples by true class and counts how often the
    verdict (clean/noisy) was right.
    """
    truth = _truth(dataset)
    truly_noisy = dataset.given_labels != truth
    flagged = np.zeros(len(truth), dtype=bool)
    flagged[report.noisy_ids] = True
    correct = flagged == truly_noisy
    per_class = {
        int(c): _ratio(int(correct[truth == c].sum()), int((truth == c).sum()))
        for c in range(dataset.num_classes)
    }
    return {
        "clean": _prf(~flagged, ~truly_noisy),
        "noisy": _prf(flagged, truly_noisy),
        "accuracy": float(correct.mean()),
        "per_class_accuracy": per_class,
    }


def correction_metrics(report, dataset: Dataset):
    truth = _truth(dataset)
    n_noisy = len(report.noisy_ids)
    n_relab = len(report.relabeled)
    n_correct = int(np.sum(truth[report.relabeled_ids] == report.new_labels)) if n_relab else 0
    return {
        "accuracy": _ratio(n_correct, n_relab),
        "coverage": 0.0 if n_noisy == 0 else n_relab / n_noisy,
        "n_relabeled": n_relab,
        "n_correct": n_correct,
    }


def test_accuracy(model, heldout, labels=None):
    """Argmax accuracy, ties broken toward the lowest class index.

    ``heldout`` is a Dataset (scored against true labels when present) or a
    feature matrix with ``labels`` given explicitly.
    """
    if isinstance(heldout, Dataset):
        X = heldout.features
        if labels is None:
            labels = heldout.true_labels if heldout.has_true_labels else heldout.given_labels
    else:
        X = np.asarray(heldout, dtype=np.float64)
    pred = np.argmax(model.predict_proba(X), axis=1)
    return float(np.mean(pred == np.asarray(labels)))


test_accuracy.__test__ = False  # not a pytest test despite the name


def per_class_rows(report, dataset: Dataset, predictions=None, bins=10):
    """Rows for a CSV breakdown: (class, n, identification accuracy).

    With ``predictions`` also returns confidence-binned rows
    (bin_low, bin_high, n_clean, clean identification accuracy), which is what
    an offline plot of accuracy versus predicted-class confidence needs.
    """
    ident = identification_metrics(report, dataset)
    truth = _truth(dataset)
    rows = [(c, int((truth == c).sum()), acc) for c, acc in ident["per_class_accuracy"].items()]
    if predictions is None:
        return rows, None
    conf = np.asarray(predictions).max(axis=1)
    truly_clean = dataset.given_labels == truth
    flagged = np.zeros(len(truth), dtype=bool)
    flagged[report.noisy_ids] = True
    edges = np.linspace(0, 1, bins + 1)
    which = np.clip(np.digitize(conf, edges) - 1, 0, bins - 1)
    binned = []
    for b in range(bins):
        sel = (which == b) & truly_clean
        binned.append((float(edges[b]), float(edges[b + 1]), int(sel.sum()),
                       _ratio(int((~flagged[sel]).sum()), int(sel.sum()))))
    return rows, binned


def epoch_metrics(record, dataset: Dataset, model, heldout=None):
    """Flat metrics for one training epoch, for the JSON trace."""
    out = {}
    if record.verification is not None and dataset.has_true_labels:
        ident = identification_metrics(record.verification, dataset)
        out["ident_noisy_precision"] = ident["noisy"]["precision"]
        out["ident_noisy_recall"] = ident["noisy"]["recall"]
        out["ident_clean_precision"] = ident["clean"]["precision"]
        out["ident_clean_recall"] = ident["clean"]["recall"]
        cor = correction_metrics(record.correction, dataset)
        out["correction_accuracy"] = cor["accuracy"]
        out["correction_coverage"] = cor["coverage"]
    if heldout is not None:
        out["test_accuracy"] = test_accuracy(model, heldout)
    return out
