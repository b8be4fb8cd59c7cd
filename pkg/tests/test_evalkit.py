import numpy as np
import pytest

from nce import Classifier, Dataset, correction_metrics, identification_metrics, test_accuracy
from nce.errors import MissingTrueLabelsError
from nce.evalkit import per_class_rows
from nce.nclc import CorrectionReport
from nce.ncnv import VerificationReport


def _dataset():
    #            0  1  2  3  4  5  6  7
    given = [0, 1, 1, 0, 2, 2, 1, 0]
    true = [0, 1, 0, 0, 2, 1, 1, 2]  # samples 2, 5, 7 are truly noisy
    return Dataset(np.ones((8, 2)), given, 3, true_labels=true)


def _report(noisy):
    scores = np.zeros(8)
    scores[noisy] = 1.0
    return VerificationReport.from_scores(scores, 0.5)


def test_identification_closed_form():
    m = identification_metrics(_report([2, 5, 6]), _dataset())
    # flagged {2,5,6}, truly noisy {2,5,7}
    assert (m["noisy"]["tp"], m["noisy"]["fp"], m["noisy"]["fn"]) == (2, 1, 1)
    assert m["noisy"]["precision"] == pytest.approx(2 / 3)
    assert m["noisy"]["recall"] == pytest.approx(2 / 3)
    assert m["clean"]["precision"] == pytest.approx(4 / 5)
    assert m["accuracy"] == pytest.approx(6 / 8)
    assert m["per_class_accuracy"] == {0: pytest.approx(1.0), 1: pytest.approx(2 / 3),
                                       2: pytest.approx(1 / 2)}


def test_identification_brute_force(rng):
    for _ in range(30):
        n = 25
        true = rng.integers(0, 3, n)
        given = np.where(rng.random(n) < 0.4, rng.integers(0, 3, n), true)
        ds = Dataset(np.ones((n, 1)), given, 3, true_labels=true)
        flagged = np.flatnonzero(rng.random(n) < 0.4)
        m = identification_metrics(_report_n(flagged, n), ds)
        tp = sum(1 for i in range(n) if i in flagged and given[i] != true[i])
        fp = sum(1 for i in range(n) if i in flagged and given[i] == true[i])
        fn = sum(1 for i in range(n) if i not in flagged and given[i] != true[i])
        assert (m["noisy"]["tp"], m["noisy"]["fp"], m["noisy"]["fn"]) == (tp, fp, fn)
        for side in ("clean", "noisy"):
            for key in ("precision", "recall", "f1"):
                v = m[side][key]
                assert v is None or 0.0 <= v <= 1.0
        assert identification_metrics(_report_n(flagged, n), ds) == m


def _report_n(noisy, n):
    scores = np.zeros(n)
    scores[noisy] = 1.0
    return VerificationReport.from_scores(scores, 0.5)


def test_undefined_ratios_are_none():
    m = identification_metrics(_report([]), _dataset())
    assert m["noisy"]["precision"] is None and m["noisy"]["f1"] is None
    assert m["noisy"]["recall"] == 0.0


def test_correction_metrics():
    ds = _dataset()
    relab = np.array([[2, 0], [5, 2]])
    rep = CorrectionReport(np.array([2, 5, 6]), np.zeros(3), 0.1, relab, np.array([6]))
    m = correction_metrics(rep, ds)
    assert m == {"accuracy": 0.5, "coverage": pytest.approx(2 / 3), "n_relabeled": 2, "n_correct": 1}
    empty = CorrectionReport(np.array([6]), np.ones(1), 0.1, np.empty((0, 2), int), np.array([6]))
    assert correction_metrics(empty, ds)["accuracy"] is None


def test_metrics_need_truth():
    ds = Dataset(np.ones((2, 1)), [0, 1], 2)
    with pytest.raises(MissingTrueLabelsError):
        identification_metrics(_report_n([0], 2), ds)


def test_test_accuracy():
    model = Classifier.init(2, 2, zero=True)
    model.params["W"][:] = [[1.0, -1.0], [0.0, 0.0]]
    X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 5.0]])
    # the last row is a tie, which goes to class 0
    assert test_accuracy(model, X, [0, 1, 0]) == 1.0
    ds = Dataset(X, [1, 1, 1], 2, true_labels=[0, 1, 1])
    assert test_accuracy(model, ds) == pytest.approx(2 / 3)


def test_per_class_rows_and_bins():
    ds = _dataset()
    preds = np.tile([0.75, 0.15, 0.1], (8, 1))
    rows, bins = per_class_rows(_report([2, 5, 6]), ds, preds, bins=10)
    assert rows[0][:2] == (0, 3)
    assert len(bins) == 10 and bins[7][2] == 5  # the five truly clean samples sit in [0.7, 0.8)
