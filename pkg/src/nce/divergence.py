"""KL and Jensen-Shannon divergences between label distributions, in bits.

Base-2 logarithms make the JS divergence span exactly [0, 1]: it reaches 1
for distributions with disjoint supports. Zero-mass terms are skipped rather
than floored so one-hot inputs give exact results.
"""

import numpy as np

from .errors import InfiniteDivergenceError, ShapeError


def _kl_terms(p, q):
    # 0 * log(0 / q) := 0
    pos = p > 0
    out = np.zeros(np.broadcast_shapes(p.shape, q.shape))
    safe_q = np.where(pos, q, 1.0)
    safe_p = np.where(pos, p, 1.0)
    # difference of logs: the ratio itself can overflow when q is subnormal
    np.multiply(p, np.log2(safe_p) - np.log2(safe_q), out=out, where=pos)
    return out


def kl(p, q):
    """KL(p || q) in bits. ``p`` must be zero wherever ``q`` is."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ShapeError(f"shape mismatch: {p.shape} vs {q.shape}")
    if np.any((p > 0) & (q <= 0)):
        raise InfiniteDivergenceError("p has mass where q has none")
    return float(_kl_terms(p, q).sum())


def js_divergence(p, q):
    """Jensen-Shannon divergence along the last axis, broadcasting over the rest."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape[-1] != q.shape[-1]:
        raise ShapeError(f"class dimension mismatch: {p.shape[-1]} vs {q.shape[-1]}")
    # halving the smallest subnormal underflows to 0; keep m positive where p + q is
    m = np.maximum((p + q) / 2, np.where(p + q > 0, np.finfo(np.float64).smallest_subnormal, 0.0))
    val = 0.5 * _kl_terms(p, m).sum(axis=-1) + 0.5 * _kl_terms(q, m).sum(axis=-1)
    # round-off can leave values a few ulps outside the range
    return np.clip(val, 0.0, 1.0)


def js(p, q):
    """JS divergence between two distributions; symmetric, in [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ShapeError(f"expected two vectors of equal length, got {p.shape} and {q.shape}")
    return float(js_divergence(p, q))


def js_to_onehot(probs, labels):
    """JS divergence between each row of ``probs`` and the one-hot of ``labels``.

    ``probs`` has shape (..., C) and ``labels`` broadcasts against ``probs[..., 0]``.
    Equivalent to ``js_divergence(probs, one_hot(labels))`` without materializing
    the one-hot tensor.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    shape = np.broadcast_shapes(probs.shape[:-1], labels.shape)
    probs = np.broadcast_to(probs, shape + probs.shape[-1:])
    labels = np.broadcast_to(labels, shape)
    target = np.zeros(probs.shape)
    np.put_along_axis(target, labels[..., None], 1.0, axis=-1)
    return js_divergence(target, probs)
