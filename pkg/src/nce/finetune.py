"""Fine-tuning objective and the full training loop.

Each post-warm-up epoch snapshots the model, splits the training set into
clean and noisy parts (ncnv), relabels the reliable noisy samples (nclc), then
runs SGD on mixup cross-entropy over clean samples plus a weighted
perturbation-consistency cross-entropy over relabeled ones.

Losses are batch means rather than batch sums, so the learning rate does not
depend on the batch size; a sum-reduced loss equals the mean times B.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classifier import SGD, Classifier, cross_entropy, train_epoch_ce
from .errors import EmptyPoolError, TrainingDivergedError
from .nclc import CorrectionReport, relabel, relabel_confident
from .ncnv import VerificationReport, verify
from .simindex import build_index
from .types import Config, Dataset, Partition, one_hot_rows

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerturbationPolicy:
    """Vector-feature augmentation: Gaussian jitter then coordinate dropout.

    Jitter has standard deviation ``sigma * scale`` per dimension, where
    ``scale`` is usually the per-dimension std of the training features.
    Dropped coordinates are set to zero (no rescaling). sigma = 0 and
    dropout_rate = 0 is the identity.
    """

    sigma: float = 0.1
    dropout_rate: float = 0.1
    scale: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.sigma < 0 or not 0 <= self.dropout_rate < 1:
            raise ValueError("need sigma >= 0 and 0 <= dropout_rate < 1")

    @classmethod
    def identity(cls):
        return cls(0.0, 0.0)

    @property
    def is_identity(self):
        return self.sigma == 0 and self.dropout_rate == 0

    def fit(self, features) -> "PerturbationPolicy":
        return PerturbationPolicy(self.sigma, self.dropout_rate, np.std(features, axis=0))

    def __call__(self, X, rng):
        X = np.asarray(X, dtype=np.float64)
        if self.is_identity:
            return X.copy()
        out = X.copy()
        if self.sigma > 0:
            scale = 1.0 if self.scale is None else self.scale
            out += self.sigma * scale * rng.standard_normal(X.shape)
        if self.dropout_rate > 0:
            out *= rng.random(X.shape) >= self.dropout_rate
        return out


@dataclass(frozen=True)
class MixupBatch:
    """Mixed inputs and soft targets with the coefficients and partners used.

    Row b mixes sample b with sample ``partner[b]`` of the source batch:
    ``x_tilde[b] = lam[b] * x[b] + (1 - lam[b]) * x[partner[b]]`` and likewise
    for the one-hot targets.
    """

    x_tilde: np.ndarray
    y_tilde: np.ndarray
    lam: np.ndarray
    partner: np.ndarray


def mixup_batch(X, labels, num_classes, alpha, rng, lam=None) -> MixupBatch:
    """Pair the batch with a shuffled copy of itself; one Beta(alpha, alpha) draw per pair.

    ``lam`` overrides the draw (a scalar or one value per row).
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("mixup needs a batch of at least 2 samples")
    partner = rng.permutation(n)
    if lam is None:
        lam = rng.beta(alpha, alpha, size=n)
    lam = np.broadcast_to(np.asarray(lam, dtype=np.float64), (n,)).copy()
    Y = one_hot_rows(labels, num_classes)
    l = lam[:, None]
    return MixupBatch(l * X + (1 - l) * X[partner], l * Y + (1 - l) * Y[partner], lam, partner)


def mix_loss(model: Classifier, batch: MixupBatch):
    """Mean soft cross-entropy between the mixed targets and predictions on mixed inputs."""
    return model.loss_and_grad(batch.x_tilde, batch.y_tilde)


def consistency_loss(model: Classifier, X, labels, policy: PerturbationPolicy, rng):
    """Mean cross-entropy of the (pseudo-)labels against predictions on perturbed inputs.

    The perturbation is drawn from ``rng``; reseeding it freezes the noise.
    """
    return cross_entropy(model, policy(X, rng), labels)


def _zeros_like(model):
    return {k: np.zeros_like(v) for k, v in model.params.items()}


def overall_loss(model: Classifier, mix: MixupBatch, relab_X, relab_labels, gamma,
                 policy: PerturbationPolicy, rng):
    """``mix_loss + gamma * consistency_loss``; the second term is 0 for an empty relabeled batch.

    Returns ``(total, grads, (mix_value, lab_value))``.
    """
    lmix, g = mix_loss(model, mix)
    if relab_X is None or len(relab_X) == 0:
        return lmix, g, (lmix, 0.0)
    llab, glab = consistency_loss(model, relab_X, relab_labels, policy, rng)
    grads = {k: g[k] + gamma * glab[k] for k in g}
    return lmix + gamma * llab, grads, (lmix, llab)


@dataclass
class EpochRecord:
    epoch: int
    phase: str  # "warmup", "nce" or "fallback"
    loss: float
    partition: Optional[Partition] = None
    verification: Optional[VerificationReport] = field(default=None, repr=False)
    correction: Optional[CorrectionReport] = field(default=None, repr=False)
    loss_mix: Optional[float] = None
    loss_lab: Optional[float] = None
    metrics: dict = field(default_factory=dict)

    def trace_entry(self):
        p = self.partition
        entry = {
            "epoch": self.epoch,
            "phase": self.phase,
            "n_clean": None if p is None else int(len(p.clean)),
            "n_noisy": None if p is None else int(len(p.noisy)),
            "n_relabeled": None if p is None else int(len(p.relabeled)),
            "n_dropped": None if p is None else int(len(p.dropped)),
            "loss": self.loss,
            "loss_mix": self.loss_mix,
            "loss_lab": self.loss_lab,
        }
        entry.update(self.metrics)
        return entry


@dataclass
class PipelineResult:
    model: Classifier
    epochs: list
    config: Config

    @property
    def partitions(self):
        return [e.partition for e in self.epochs if e.partition is not None]

    def trace(self):
        return [e.trace_entry() for e in self.epochs]


def _streams(seed):
    init, shuffle, mix, aug = np.random.SeedSequence(seed).spawn(4)
    return (int(init.generate_state(1)[0]), np.random.default_rng(shuffle),
            np.random.default_rng(mix), np.random.default_rng(aug))


def snapshot(model: Classifier, dataset: Dataset, feature_source="raw"):
    """Frozen predictions and similarity features for one epoch."""
    frozen = model.copy()
    preds = frozen.predict_proba(dataset.features)
    feats = dataset.features if feature_source == "raw" else frozen.embed(dataset.features)
    return preds, feats


def partition_epoch(model, dataset: Dataset, config: Config):
    """NCNV then NCLC on a frozen snapshot of ``model``.

    Raises EmptyPoolError when no sample is judged clean.
    """
    preds, feats = snapshot(model, dataset, config.feature_source)
    index = build_index(feats)
    ver = verify(dataset, preds, index, config.K, config.tau)
    if ver.clean_ids.size == 0:
        raise EmptyPoolError("verification left no clean samples")
    if config.correction == "ct":
        cor = relabel_confident(ver, preds, config.ct_threshold)
    else:
        cor = relabel(dataset, ver, preds, config.K, config.tau_prime, features=feats)
    part = Partition(ver.clean_ids, ver.noisy_ids, cor.relabeled, cor.dropped,
                     ver.scores, cor.cor_scores)
    return part, ver, cor


def finetune_epoch(model, opt, dataset: Dataset, part: Partition, config: Config,
                   policy: PerturbationPolicy, rngs):
    """Mini-batch SGD over the clean set, pairing each clean batch with a relabeled batch."""
    shuffle_rng, mix_rng, aug_rng = rngs
    X, y, C = dataset.features, dataset.given_labels, dataset.num_classes
    lab_X = X[part.relabeled[:, 0]] if len(part.relabeled) else np.empty((0, X.shape[1]))
    lab_y = part.relabeled[:, 1] if len(part.relabeled) else np.empty(0, dtype=np.int64)
    if config.apply_lab_to_clean:
        lab_X = np.vstack([lab_X, X[part.clean]])
        lab_y = np.concatenate([lab_y, y[part.clean]])
    use_lab = config.use_lab_loss and config.gamma > 0 and len(lab_y) > 0

    order = shuffle_rng.permutation(part.clean)
    lab_order = shuffle_rng.permutation(len(lab_y)) if use_lab else None
    lab_pos = 0
    totals, mixes, labs = [], [], []
    for b, start in enumerate(range(0, len(order), config.B)):
        idx = order[start:start + config.B]
        if len(idx) < 2:
            continue
        rX = rY = None
        if use_lab:
            take = np.arange(lab_pos, lab_pos + config.B_prime) % len(lab_y)
            lab_pos = (lab_pos + config.B_prime) % len(lab_y)
            sel = lab_order[take]
            rX, rY = lab_X[sel], lab_y[sel]
        if config.use_mixup:
            mix = mixup_batch(X[idx], y[idx], C, config.alpha, mix_rng)
            total, grads, (lmix, llab) = overall_loss(model, mix, rX, rY, config.gamma,
                                                      policy, aug_rng)
        else:
            lmix, grads = cross_entropy(model, X[idx], y[idx])
            llab = 0.0
            if use_lab:
                llab, glab = consistency_loss(model, rX, rY, policy, aug_rng)
                grads = {k: grads[k] + config.gamma * glab[k] for k in grads}
            total = lmix + config.gamma * llab
        if not np.isfinite(total):
            raise TrainingDivergedError(f"non-finite loss in fine-tuning batch {b}")
        opt.step(model, grads)
        totals.append(total)
        mixes.append(lmix)
        labs.append(llab)
    if not totals:
        return 0.0, 0.0, 0.0
    return float(np.mean(totals)), float(np.mean(mixes)), float(np.mean(labs))


def run_pipeline(dataset: Dataset, config: Config, heldout: Dataset = None,
                 evaluate=True, model: Classifier = None) -> PipelineResult:
    """Warm-up for epochs 1..T_wu-1, then per-epoch NCNV, NCLC and fine-tuning.

    When ``T_wu == T_tr`` every epoch is a warm-up epoch, which makes the run a
    plain cross-entropy baseline. Per-epoch metrics against hidden labels and
    ``heldout`` accuracy are attached when ``evaluate`` is set.
    """
    from . import evalkit  # evaluation only; reads true labels

    init_seed, shuffle_rng, mix_rng, aug_rng = _streams(config.seed)
    if model is None:
        model = Classifier.init(dataset.dim, dataset.num_classes, config.hidden_dim, init_seed)
    opt = SGD(config.eta, config.momentum, config.weight_decay)
    policy = PerturbationPolicy(config.perturbation_sigma, config.perturbation_dropout)
    if not policy.is_identity:
        policy = policy.fit(dataset.features)
    X, y = dataset.features, dataset.given_labels
    pure_warmup = config.T_wu >= config.T_tr

    records = []
    for t in range(1, config.T_tr + 1):
        if pure_warmup or t < config.T_wu:
            loss = train_epoch_ce(model, opt, X, y, config.B, shuffle_rng, epoch=t)
            rec = EpochRecord(t, "warmup", loss)
        else:
            try:
                part, ver, cor = partition_epoch(model, dataset, config)
            except EmptyPoolError as err:
                log.warning("epoch %d: %s; falling back to warm-up training", t, err)
                loss = train_epoch_ce(model, opt, X, y, config.B, shuffle_rng, epoch=t)
                rec = EpochRecord(t, "fallback", loss)
            else:
                total, lmix, llab = finetune_epoch(model, opt, dataset, part, config, policy,
                                                   (shuffle_rng, mix_rng, aug_rng))
                rec = EpochRecord(t, "nce", total, part, ver, cor, lmix, llab)
        if evaluate:
            rec.metrics = evalkit.epoch_metrics(rec, dataset, model, heldout)
        records.append(rec)
    return PipelineResult(model, records, config)


def cross_entropy_baseline(dataset: Dataset, config: Config, heldout=None, evaluate=True):
    """Warm-up training continued for all T_tr epochs."""
    return run_pipeline(dataset, config.replace(T_wu=config.T_tr), heldout, evaluate)
