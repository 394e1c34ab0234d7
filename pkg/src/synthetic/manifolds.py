"""Synthetic point clouds of known intrinsic dimension

All generators draw from a Philox stream (see ``src.rng``), so a given
seed reproduces the same matrix bit for bit on any platform.
"""
import logging

import numpy as np

from src.errors import PreconditionError
from src.models.schemas import EmbeddingMatrix, SyntheticSpec
from src.rng import SeedLike, make_generator, split_seed

logger = logging.getLogger(__name__)


def gaussian_cloud(n: int, d: int, seed: int) -> EmbeddingMatrix:
    """n i.i.d. standard normal d-vectors (the random baseline)"""
    if n < 1 or d < 1:
        raise PreconditionError(f"gaussian cloud needs n >= 1 and d >= 1, got n={n}, d={d}")
    data = make_generator(seed).standard_normal((n, d))
    logger.info(f"✓ Generated gaussian cloud n={n}, d={d}, seed={seed}")
    return EmbeddingMatrix(data=data, source=f"gaussian(n={n}, d={d}, seed={seed})")


def random_orthonormal(D: int, m: int, seed: SeedLike) -> np.ndarray:
    """D x m matrix with orthonormal columns, Haar distributed

    QR of a Gaussian matrix with the signs of R's diagonal forced
    positive, which makes the factorization unique.
    """
    if m < 1 or m > D:
        raise PreconditionError(f"orthonormal map needs 1 <= m <= D, got m={m}, D={D}")
    gaussian = make_generator(seed).standard_normal((D, m))
    q, r = np.linalg.qr(gaussian)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def hypercube_points(n: int, m: int, seed: int) -> np.ndarray:
    """The raw [0, 1]^m sample that ``embedded_hypercube`` maps into D dims"""
    if n < 1 or m < 1:
        raise PreconditionError(f"hypercube needs n >= 1 and m >= 1, got n={n}, m={m}")
    points_seed, _ = split_seed(seed, 2)
    return make_generator(points_seed).random((n, m))


def embedded_hypercube(n: int, m: int, D: int, seed: int) -> EmbeddingMatrix:
    """n uniform points of [0, 1]^m placed isometrically in D dimensions

    The points and the map use separate streams of ``seed``, so the same
    points are embedded whatever D is.
    """
    _, map_seed = split_seed(seed, 2)
    basis = random_orthonormal(D, m, map_seed)
    data = hypercube_points(n, m, seed) @ basis.T
    logger.info(f"✓ Generated hypercube n={n}, m={m}, D={D}, seed={seed}")
    return EmbeddingMatrix(data=data, source=f"hypercube(n={n}, m={m}, D={D}, seed={seed})")


def generate(spec: SyntheticSpec) -> EmbeddingMatrix:
    """Materialize a SyntheticSpec"""
    if spec.kind == "gaussian":
        return gaussian_cloud(spec.n, spec.d, spec.seed)
    return embedded_hypercube(spec.n, spec.m, spec.d, spec.seed)
