"""Reproducible row subsampling"""
import logging

import numpy as np

from src.errors import PreconditionError
from src.models.schemas import EmbeddingMatrix
from src.rng import make_generator

logger = logging.getLogger(__name__)


def sample_indices(n: int, count: int, seed: int) -> np.ndarray:
    """Ascending row indices of a uniform sample without replacement"""
    if count < 1 or count > n:
        raise PreconditionError(f"sample count {count} must satisfy 1 <= count <= n = {n}")
    if count == n:
        return np.arange(n)
    rng = make_generator(seed)
    return np.sort(rng.choice(n, size=count, replace=False))


def sample_rows(matrix: EmbeddingMatrix, count: int, seed: int) -> EmbeddingMatrix:
    """Uniformly subsample rows, keeping their original order and labels

    Args:
        matrix: Matrix to sample from
        count: Rows to keep (1 <= count <= n)
        seed: Generator seed; equal seeds give equal samples

    Returns:
        The same matrix when count == n, otherwise a new sampled matrix
    """
    indices = sample_indices(matrix.rows, count, seed)
    if count == matrix.rows:
        return matrix

    labels = [matrix.labels[i] for i in indices] if matrix.labels is not None else None
    logger.info(f"✓ Sampled {count} of {matrix.rows} rows (seed={seed})")
    return EmbeddingMatrix(
        data=matrix.data[indices],
        labels=labels,
        source=f"{matrix.source} [sample {count}, seed {seed}]",
        storage_dtype=matrix.storage_dtype,
    )
