"""Exact Euclidean k-nearest-neighbor search over embedding rows"""
import logging
from typing import Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from src.config import config
from src.errors import PreconditionError
from src.models.schemas import EmbeddingMatrix, NeighborTable

logger = logging.getLogger(__name__)

# Squared distances below this fraction of |a|^2 + |b|^2 are cancellation noise
CANCELLATION_FLOOR = 64 * np.finfo(np.float64).eps


def _squared_kernel(a: np.ndarray, a_sq: np.ndarray, b: np.ndarray, b_sq: np.ndarray) -> np.ndarray:
    """||a||^2 + ||b||^2 - 2 a.b with noise-level values set to exactly 0"""
    scale = a_sq[:, None] + b_sq[None, :]
    sq = scale - 2.0 * (a @ b.T)
    sq[sq <= CANCELLATION_FLOOR * scale] = 0.0
    return sq


def pairwise_block_distances(a, b) -> np.ndarray:
    """Squared Euclidean distances between every row of ``a`` and of ``b``

    Args:
        a: |A| x d row block
        b: |B| x d row block

    Returns:
        |A| x |B| float64 matrix of squared distances, never negative
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise PreconditionError(
            f"blocks must be 2-D with equal dimension, got {a.shape} and {b.shape}"
        )
    a_sq = np.einsum("ij,ij->i", a, a)
    b_sq = np.einsum("ij,ij->i", b, b)
    return _squared_kernel(a, a_sq, b, b_sq)


def _block_candidates(sq: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Column positions and values of the k smallest entries per row

    Among equal values the lower column wins, matching the global
    lower-index tie rule because columns are in ascending row order.
    """
    if sq.shape[1] <= k:
        cols = np.broadcast_to(np.arange(sq.shape[1]), sq.shape).copy()
        return cols, sq.copy()

    cols = np.argpartition(sq, k - 1, axis=1)[:, :k]
    vals = np.take_along_axis(sq, cols, axis=1)
    kth = vals.max(axis=1)

    # argpartition picks arbitrarily among values tied with the k-th
    tied = np.flatnonzero((sq <= kth[:, None]).sum(axis=1) > k)
    for r in tied:
        within = np.flatnonzero(sq[r] <= kth[r])
        keep = within[np.argsort(sq[r, within], kind="stable")[:k]]
        cols[r] = keep
        vals[r] = sq[r, keep]
    return cols, vals


def _query_block(
    x: np.ndarray,
    centered: np.ndarray,
    norms: np.ndarray,
    start: int,
    stop: int,
    k: int,
    reference_block: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """k nearest neighbors of rows [start, stop) against every other row

    Candidates come from the kernel on ``centered``; final distances are
    measured on the original rows ``x``.
    """
    n = x.shape[0]
    q = centered[start:stop]
    q_sq = norms[start:stop]
    own = np.arange(start, stop)

    best_sq = np.full((stop - start, k), np.inf)
    best_idx = np.full((stop - start, k), -1, dtype=np.int64)

    for r0 in range(0, n, reference_block):
        r1 = min(r0 + reference_block, n)
        sq = _squared_kernel(q, q_sq, centered[r0:r1], norms[r0:r1])

        inside = np.flatnonzero((own >= r0) & (own < r1))
        sq[inside, own[inside] - r0] = np.inf

        cols, vals = _block_candidates(sq, k)
        merged_sq = np.concatenate([best_sq, vals], axis=1)
        merged_idx = np.concatenate([best_idx, cols + r0], axis=1)
        order = np.lexsort((merged_idx, merged_sq), axis=1)[:, :k]
        best_sq = np.take_along_axis(merged_sq, order, axis=1)
        best_idx = np.take_along_axis(merged_idx, order, axis=1)

    # Final distances by direct subtraction, then re-sorted
    diff = x[start:stop, None, :] - x[best_idx]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    order = np.lexsort((best_idx, dist), axis=1)
    return np.take_along_axis(best_idx, order, axis=1), np.take_along_axis(dist, order, axis=1)


def exact_knn(
    matrix: EmbeddingMatrix,
    k: int,
    threads: Optional[int] = None,
    query_block: Optional[int] = None,
    reference_block: Optional[int] = None,
) -> NeighborTable:
    """Exact k nearest neighbors of every row, excluding the row itself

    Query blocks run in parallel; each block's result depends only on
    its own rows, so output does not change with the thread count.

    Args:
        matrix: Rows to search
        k: Neighbors per row (1 <= k <= n-1)
        threads: Worker threads, -1 for all cores (default from config)
        query_block: Query rows per task (default from config)
        reference_block: Reference rows per kernel tile (default from config)

    Returns:
        NeighborTable with true (square-rooted) Euclidean distances
    """
    n = matrix.rows
    if k < 1 or k > n - 1:
        raise PreconditionError(f"k={k} violates 1 <= k <= n-1 = {n - 1}")

    threads = config.THREADS if threads is None else threads
    if threads != -1 and threads < 1:
        raise PreconditionError(f"threads={threads} must be -1 (all cores) or >= 1")
    query_block = query_block or config.QUERY_BLOCK
    reference_block = reference_block or config.REFERENCE_BLOCK

    x = matrix.data
    # Centered rows keep a shared offset out of the cancellation floor
    centered = x - x.mean(axis=0)
    norms = np.einsum("ij,ij->i", centered, centered)

    logger.info(f"Searching exact {k}-NN for {n} rows (d={matrix.dim}, threads={threads})")
    blocks = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_query_block)(
            x, centered, norms, start, min(start + query_block, n), k, reference_block
        )
        for start in range(0, n, query_block)
    )

    table = NeighborTable(
        k=k,
        indices=np.vstack([b[0] for b in blocks]),
        distances=np.vstack([b[1] for b in blocks]),
    )
    logger.info(f"✓ Neighbor table ready ({n} x {k})")
    return table
