"""Local intrinsic dimension, global ID and redundancy estimation

Per-row LID is the maximum-likelihood estimate from k nearest-neighbor
distances; the global ID is the harmonic mean of per-row LIDs, and the
redundancy ratio compares it with the extrinsic dimension.
"""
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np

from src.config import config
from src.errors import InvariantViolation, PreconditionError
from src.estimation.knn import exact_knn
from src.models.schemas import EmbeddingMatrix, IdReport, LidStats, LidVector, NeighborTable

logger = logging.getLogger(__name__)


def _normalizer(k: int, bias_corrected: bool) -> int:
    if k < 2:
        raise PreconditionError(f"LID needs k >= 2 neighbors, got k={k}")
    if bias_corrected and k < 3:
        raise PreconditionError(f"bias-corrected LID needs k >= 3, got k={k}")
    return k - 2 if bias_corrected else k - 1


def lid_point(dists: Sequence[float], bias_corrected: bool = False) -> Optional[float]:
    """LID of one point from its k ascending neighbor distances

    Args:
        dists: d_1 <= ... <= d_k
        bias_corrected: Use the 1/(k-2) normalization instead of 1/(k-1)

    Returns:
        The estimate, or None for a degenerate point (a zero inner
        distance, or all distances equal)
    """
    d = np.asarray(dists, dtype=np.float64)
    if d.ndim != 1:
        raise PreconditionError("distances must be a 1-D sequence")
    norm = _normalizer(d.size, bias_corrected)
    if not np.isfinite(d).all() or (d < 0).any():
        raise PreconditionError("distances must be finite and nonnegative")
    if (np.diff(d) < 0).any():
        raise PreconditionError("distances must be sorted ascending")

    if d[0] == 0.0:
        return None

    log_k = math.log(d[-1])
    total = 0.0
    for d_i in d[:-1]:
        total += log_k - math.log(d_i)
    if total == 0.0:
        return None
    return norm / total


def lid_all(
    table: NeighborTable,
    zero_eps: float = config.ZERO_EPS,
    bias_corrected: bool = False,
) -> LidVector:
    """LID for every row of a neighbor table

    Args:
        table: Sorted neighbor distances
        zero_eps: Distances below this count as zero
        bias_corrected: Use the 1/(k-2) normalization

    Returns:
        LidVector with degenerate rows excluded
    """
    norm = _normalizer(table.k, bias_corrected)
    dist = table.distances

    zero = dist < zero_eps
    logs = np.log(np.where(zero, 1.0, dist))
    total = (logs[:, -1:] - logs[:, :-1]).sum(axis=1)
    excluded = zero.any(axis=1) | (total <= 0.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(excluded, np.nan, norm / total)

    lids = LidVector(k=table.k, values=values, excluded=excluded, bias_corrected=bias_corrected)
    if lids.n_excluded:
        logger.warning(f"⚠ Excluded {lids.n_excluded} degenerate rows (zero or equal distances)")
    return lids


def _used(lids: Union[LidVector, Sequence[float]]) -> np.ndarray:
    if isinstance(lids, LidVector):
        return lids.used_values()
    return np.asarray(lids, dtype=np.float64).ravel()


def global_id(lids: Union[LidVector, Sequence[float]]) -> float:
    """Harmonic mean of the non-excluded LIDs

    The reciprocal sum is exactly rounded, so the result does not depend
    on the order of the values.
    """
    used = _used(lids)
    if used.size == 0:
        raise PreconditionError("every point was excluded as degenerate; no global ID exists")
    return used.size / math.fsum(1.0 / used)


def redundancy(ed: float, intrinsic: float) -> float:
    """Redundancy ratio (ED - ID) / ED; negative when ID exceeds ED"""
    if ed <= 0:
        raise PreconditionError(f"extrinsic dimension must be positive, got {ed}")
    if intrinsic <= 0:
        raise PreconditionError(f"intrinsic dimension must be positive, got {intrinsic}")
    return (ed - intrinsic) / ed


def lid_stats(values: np.ndarray) -> LidStats:
    """Dispersion statistics; percentiles interpolate linearly"""
    p5, p50, p95 = np.percentile(values, [5, 50, 95])
    return LidStats(
        mean=float(np.mean(values)),
        median=float(p50),
        p5=float(p5),
        p95=float(p95),
        std=float(np.std(values)),
    )


def summarize(lids: LidVector, ed: int) -> IdReport:
    """Aggregate a LidVector into an IdReport

    Args:
        lids: Per-row estimates
        ed: Extrinsic dimension of the matrix

    Returns:
        IdReport for the matrix
    """
    gid = global_id(lids)
    used = lids.used_values()
    lo, hi = float(used.min()), float(used.max())
    slack = 1e-12 * hi
    if not lo - slack <= gid <= hi + slack:
        raise InvariantViolation(f"global ID {gid} lies outside the LID range [{lo}, {hi}]")

    return IdReport(
        id=gid,
        ed=ed,
        redundancy=redundancy(ed, gid),
        k=lids.k,
        n_used=lids.n_used,
        n_excluded=lids.n_excluded,
        lid_stats=lid_stats(used),
        bias_corrected=lids.bias_corrected,
    )


def estimate(
    matrix: EmbeddingMatrix,
    k: int = config.DEFAULT_K,
    zero_eps: float = config.ZERO_EPS,
    threads: Optional[int] = None,
    bias_corrected: bool = False,
) -> IdReport:
    """exact_knn -> lid_all -> global_id -> redundancy for one matrix"""
    _normalizer(k, bias_corrected)
    table = exact_knn(matrix, k, threads=threads)
    lids = lid_all(table, zero_eps=zero_eps, bias_corrected=bias_corrected)
    return summarize(lids, matrix.dim)
