"""Exact cosine-similarity nearest-neighbor search.

Vectors are L2-normalized once when the index is built, so a query is a plain
dot product against the pool. Similarities are computed with ``einsum`` rather
than BLAS so that identical rows always produce bit-identical scores and the
result does not depend on thread count; ties are then broken by ascending
sample index.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DegenerateVectorError, EmptyPoolError, ShapeError
from .types import Dataset, NeighborSet

DEGENERATE_NORM = 1e-12


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"cannot compare vectors of shapes {a.shape} and {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < DEGENERATE_NORM or nb < DEGENERATE_NORM:
        raise DegenerateVectorError("cosine similarity is undefined for a zero-norm vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def n_workers():
    env = os.environ.get("NCE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class SimilarityIndex:
    """Normalized copy of every sample's vector plus the pool that queries search.

    Queries are addressed by dataset sample id, so a sample outside the pool
    (e.g. a noisy sample searched against the clean pool) can still be a query.

    Attributes
    ----------
    vectors : (N, d) unit-normalized vectors for all samples; degenerate rows are zero
    norms : (N,) original L2 norms
    pool_ids : sorted sample ids searchable by queries (degenerate rows removed)
    """

    def __init__(self, vectors, norms, pool_ids):
        self.vectors = vectors
        self.norms = norms
        self.pool_ids = pool_ids
        self._pool = np.ascontiguousarray(vectors[pool_ids])
        self._pos = {int(s): i for i, s in enumerate(pool_ids)}

    def __len__(self):
        return len(self.pool_ids)

    @property
    def degenerate(self):
        return self.norms < DEGENERATE_NORM

    def query_vector(self, query_id):
        if not 0 <= query_id < len(self.norms):
            raise IndexError(f"sample id {query_id} out of range")
        if self.norms[query_id] < DEGENERATE_NORM:
            raise DegenerateVectorError(
                f"sample {query_id} has a zero-norm feature vector", sample_id=int(query_id)
            )
        return self.vectors[query_id]

    def position(self, sample_id):
        """Row of ``sample_id`` inside the pool, or None if it is not pooled."""
        return self._pos.get(int(sample_id))


def build_index(data, subset=None) -> SimilarityIndex:
    """Index over all samples of ``data`` or only the ids in ``subset``.

    ``data`` is a Dataset or an (N, d) feature matrix (e.g. learned embeddings).
    """
    feats = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if feats.ndim != 2:
        raise ShapeError(f"expected an N x d matrix, got shape {feats.shape}")
    norms = np.linalg.norm(feats, axis=1)
    ok = norms >= DEGENERATE_NORM
    vectors = np.zeros_like(feats)
    vectors[ok] = feats[ok] / norms[ok, None]

    if subset is None:
        ids = np.arange(feats.shape[0])
    else:
        ids = np.asarray(subset, dtype=np.int64).ravel()
        if ids.size and (ids.min() < 0 or ids.max() >= feats.shape[0]):
            raise IndexError("subset contains out-of-range sample ids")
        if np.unique(ids).size != ids.size:
            raise ValueError("subset contains duplicate ids")
        ids = np.sort(ids)
    ids = ids[ok[ids]]
    if ids.size == 0:
        raise EmptyPoolError("index pool has no non-degenerate vectors")
    vectors.setflags(write=False)
    return SimilarityIndex(vectors, norms, ids)


def _similarities(queries, pool):
    return np.einsum("qj,ij->qi", queries, pool)


def _select(sims, pool_ids, k, self_pos=None):
    """Top-k positions of one similarity row, ties by ascending sample id."""
    if self_pos is not None:
        sims = sims.copy()
        sims[self_pos] = -np.inf
        avail = sims.size - 1
    else:
        avail = sims.size
    k = min(k, avail)
    if k <= 0:
        raise EmptyPoolError("no pool members left after excluding the query")
    if k < sims.size:
        part = np.argpartition(-sims, k - 1)[:k]
        kth = sims[part].min()
        cand = np.flatnonzero(sims >= kth)
    else:
        cand = np.arange(sims.size)
    if self_pos is not None:
        cand = cand[cand != self_pos]
    order = np.lexsort((pool_ids[cand], -sims[cand]))[:k]
    return cand[order]


def knn(index: SimilarityIndex, query_id, k, exclude_self=True) -> NeighborSet:
    """The ``k`` pool members most similar to sample ``query_id``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = index.query_vector(query_id)
    sims = _similarities(q[None, :], index._pool)[0]
    self_pos = index.position(query_id) if exclude_self else None
    pos = _select(sims, index.pool_ids, k, self_pos)
    return NeighborSet(index.pool_ids[pos], np.clip(sims[pos], -1.0, 1.0))


def knn_batch(index: SimilarityIndex, query_ids, k, exclude_self=True, block=256, workers=None):
    """``knn`` for many queries at once.

    Returns ``(indices, similarities)`` arrays of shape (len(query_ids), k'),
    with k' = min(k, effective pool size). The pool size is the same for every
    query unless ``exclude_self`` removes pooled queries, in which case k' is
    the smallest effective size, which equals min(k, |pool| - 1).
    """
    query_ids = np.asarray(query_ids, dtype=np.int64)
    if k < 1:
        raise ValueError("k must be >= 1")
    for q in query_ids:
        index.query_vector(int(q))
    self_pos = np.array(
        [index.position(q) if exclude_self else None for q in query_ids], dtype=object
    )
    has_self = any(p is not None for p in self_pos)
    k_eff = min(k, len(index) - (1 if has_self else 0))
    if k_eff <= 0:
        raise EmptyPoolError("no pool members left after excluding the query")

    out_idx = np.empty((len(query_ids), k_eff), dtype=np.int64)
    out_sim = np.empty((len(query_ids), k_eff))
    pool_ids = index.pool_ids

    def run(start):
        stop = min(start + block, len(query_ids))
        sims = _similarities(index.vectors[query_ids[start:stop]], index._pool)
        rows = np.arange(stop - start)
        selfs = self_pos[start:stop]
        excluded = np.array([p is not None for p in selfs])
        if excluded.any():
            sims[rows[excluded], selfs[excluded].astype(np.int64)] = -np.inf
        if k_eff < sims.shape[1]:
            part = np.argpartition(-sims, k_eff - 1, axis=1)[:, :k_eff]
        else:
            part = np.broadcast_to(np.arange(sims.shape[1]), (len(rows), sims.shape[1]))
        vals = np.take_along_axis(sims, part, axis=1)
        # rows whose k-th value is tied with an unselected member need the exact path
        tied = (sims >= vals.min(axis=1, keepdims=True)).sum(axis=1) > k_eff
        order = np.lexsort((pool_ids[part], -vals), axis=-1)
        pos = np.take_along_axis(part, order, axis=1)[:, :k_eff]
        for r in np.flatnonzero(tied):
            pos[r] = _select(sims[r], pool_ids, k_eff)
        out_idx[start:stop] = pool_ids[pos]
        out_sim[start:stop] = np.take_along_axis(sims, pos, axis=1)

    starts = range(0, len(query_ids), block)
    workers = workers or n_workers()
    if workers > 1 and len(query_ids) > block:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(run, starts))
    else:
        for s in starts:
            run(s)
    np.clip(out_sim, -1.0, 1.0, out=out_sim)
    return out_idx, out_sim
