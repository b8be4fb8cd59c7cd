import numpy as np
import pytest

from nce import (
    Classifier,
    Config,
    PerturbationPolicy,
    cross_entropy,
    cross_entropy_baseline,
    mix_loss,
    mixup_batch,
    overall_loss,
    run_pipeline,
    warmup,
)
from nce.evalkit import correction_metrics
from nce.finetune import _streams, consistency_loss

from gradcheck import check_lab, check_mix, check_overall


@pytest.mark.parametrize("check", [check_mix, check_lab, check_overall])
@pytest.mark.parametrize("seed", range(4))
def test_loss_gradients(check, seed):
    assert check(seed) < 1e-5


def test_mixup_endpoints(rng):
    X = rng.standard_normal((6, 3))
    y = np.array([0, 1, 2, 0, 1, 2])
    one = mixup_batch(X, y, 3, 4.0, np.random.default_rng(1), lam=1.0)
    assert np.array_equal(one.x_tilde, X) and np.array_equal(one.y_tilde, np.eye(3)[y])
    zero = mixup_batch(X, y, 3, 4.0, np.random.default_rng(1), lam=0.0)
    assert np.array_equal(zero.x_tilde, X[zero.partner])
    assert np.array_equal(zero.y_tilde, np.eye(3)[y[zero.partner]])


def test_mixup_is_convex(rng):
    X = rng.standard_normal((10, 4))
    y = rng.integers(0, 3, 10)
    b = mixup_batch(X, y, 3, 4.0, rng)
    lam = b.lam[:, None]
    assert np.allclose(b.x_tilde, lam * X + (1 - lam) * X[b.partner])
    assert np.allclose(b.y_tilde.sum(axis=1), 1.0)
    assert sorted(b.partner.tolist()) == list(range(10))


def test_beta_mean():
    rng = np.random.default_rng(2024)
    lams = np.concatenate([
        mixup_batch(np.zeros((1000, 1)), np.zeros(1000, int), 2, 4.0, rng).lam
        for _ in range(100)
    ])
    assert lams.size == 100_000
    assert abs(lams.mean() - 0.5) <= 0.01


def test_mixup_needs_pairs():
    with pytest.raises(ValueError):
        mixup_batch(np.ones((1, 2)), [0], 2, 4.0, np.random.default_rng(0))


def test_overall_loss_is_additive(rng):
    model = Classifier.init(4, 3, 5, seed=3)
    X = rng.standard_normal((8, 4))
    y = rng.integers(0, 3, 8)
    mix = mixup_batch(X, y, 3, 4.0, rng)
    Xr, yr = rng.standard_normal((4, 4)), rng.integers(0, 3, 4)
    policy = PerturbationPolicy(0.2, 0.1).fit(X)
    total, _, (lmix, llab) = overall_loss(model, mix, Xr, yr, 0.3, policy, np.random.default_rng(5))
    assert lmix == mix_loss(model, mix)[0]
    assert llab == consistency_loss(model, Xr, yr, policy, np.random.default_rng(5))[0]
    assert total == pytest.approx(lmix + 0.3 * llab, abs=1e-15)
    # an empty relabeled batch contributes nothing
    total0, _, (_, lab0) = overall_loss(model, mix, None, None, 0.3, policy, rng)
    assert total0 == lmix and lab0 == 0.0


def test_identity_perturbation_reduces_to_cross_entropy(rng):
    model = Classifier.init(3, 2, seed=0)
    X, y = rng.standard_normal((5, 3)), rng.integers(0, 2, 5)
    got = consistency_loss(model, X, y, PerturbationPolicy.identity(), rng)[0]
    assert got == cross_entropy(model, X, y)[0]


def test_perturbation_policy(rng):
    X = rng.standard_normal((2000, 3)) * np.array([1.0, 5.0, 0.1])
    policy = PerturbationPolicy(0.5, 0.0).fit(X)
    noise = policy(X, rng) - X
    assert np.allclose(noise.std(axis=0) / X.std(axis=0), 0.5, atol=0.05)
    dropped = PerturbationPolicy(0.0, 0.3)(np.ones((4000, 2)), rng)
    assert abs((dropped == 0).mean() - 0.3) < 0.02


def test_pipeline_is_deterministic(blobs_sym50, small_config):
    noisy, test = blobs_sym50
    a = run_pipeline(noisy, small_config, heldout=test)
    b = run_pipeline(noisy, small_config, heldout=test)
    assert a.trace() == b.trace()
    assert all(np.array_equal(a.model.params[k], b.model.params[k]) for k in a.model.params)


def test_pipeline_phases_and_partitions(blobs_sym50, small_config):
    noisy, _ = blobs_sym50
    res = run_pipeline(noisy, small_config.replace(tau=0.55), evaluate=False)
    assert [e.phase for e in res.epochs] == ["warmup"] * 2 + ["nce"] * 4
    for p in res.partitions:
        p.check(noisy.n_samples)


def test_all_warmup_run_equals_warmup(blobs_sym50, small_config):
    noisy, _ = blobs_sym50
    cfg = small_config.replace(T_wu=small_config.T_tr)
    res = cross_entropy_baseline(noisy, cfg, evaluate=False)
    init, shuffle, _, _ = _streams(cfg.seed)
    model = Classifier.init(noisy.dim, 4, cfg.hidden_dim, init)
    warmup(model, noisy, cfg.T_tr, cfg.eta, cfg.B, rng=shuffle)
    assert all(np.array_equal(model.params[k], res.model.params[k]) for k in model.params)


def test_empty_clean_pool_falls_back(blobs_sym50, small_config, caplog):
    noisy, _ = blobs_sym50
    cfg = small_config.replace(tau=1e-9)
    res = run_pipeline(noisy, cfg, evaluate=False)
    assert [e.phase for e in res.epochs][2:] == ["fallback"] * 4
    assert "falling back" in caplog.text


# Measured on the seed-0 benchmark at tau=0.55, tau'=2e-3, T_tr=60: every relabel was correct.
def test_relabel_accuracy_during_training(blobs_sym50):
    noisy, _ = blobs_sym50
    res = run_pipeline(noisy, Config(tau=0.55, T_tr=60))
    relabeled = correct = 0
    for rec in res.epochs:
        if rec.correction is not None:
            m = correction_metrics(rec.correction, noisy)
            relabeled += m["n_relabeled"]
            correct += m["n_correct"]
    assert relabeled > 0
    assert correct / relabeled >= 0.95
