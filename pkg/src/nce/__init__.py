"""Neighborhood collective estimation for learning with noisy labels.

Finds noisy labels by comparing each sample's label with the predictions at
its nearest neighbors in feature space, relabels the noisy samples that sit
firmly inside a clean neighborhood, and fine-tunes a small classifier on the
result with mixup and perturbation-consistency losses.
"""

from .classifier import SGD, Classifier, cross_entropy, sgd_step, warmup
from .datagen import NoiseSpec, inject_noise, make_blob_split, make_blobs
from .divergence import js, js_divergence, kl
from .evalkit import correction_metrics, identification_metrics, test_accuracy
from .finetune import (
    MixupBatch,
    PerturbationPolicy,
    consistency_loss,
    cross_entropy_baseline,
    mix_loss,
    mixup_batch,
    overall_loss,
    run_pipeline,
)
from .nclc import CorrectionReport, correct, correction_score, relabel
from .ncnv import VerificationReport, verification_score, verify
from .simindex import SimilarityIndex, build_index, cosine_similarity, knn, knn_batch
from .types import Config, Dataset, NeighborSet, Partition, one_hot, validate_dataset

__version__ = "0.1.0"
