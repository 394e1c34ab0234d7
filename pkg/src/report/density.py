"""LID density curves: Gaussian KDE and histogram, emitted as data"""
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.stats import norm

from src.config import config
from src.errors import PreconditionError
from src.models.schemas import DensityCurve, LidVector

LidInput = Union[LidVector, Sequence[float], np.ndarray]

# Data points per kernel evaluation chunk
KDE_CHUNK = 4096


def _lid_values(lids: LidInput) -> np.ndarray:
    if isinstance(lids, LidVector):
        return lids.used_values()
    values = np.asarray(lids, dtype=np.float64).ravel()
    return values[np.isfinite(values)]


def silverman_bandwidth(values: np.ndarray) -> float:
    """Rule-of-thumb width 1.06 * sigma * n^(-1/5)"""
    return float(1.06 * np.std(values, ddof=1) * values.size ** (-0.2))


def lid_histogram(lids: LidInput, bins: int = config.HISTOGRAM_BINS) -> DensityCurve:
    """Equal-width histogram over [min, max] with unit area

    The curve holds the bin centers plus both outer edges, so the
    trapezoidal area equals the histogram area exactly.

    Args:
        lids: LidVector or raw LID values
        bins: Number of bins

    Returns:
        DensityCurve with method "histogram" and bandwidth = bin width
    """
    values = _lid_values(lids)
    if bins < 1:
        raise PreconditionError(f"histogram needs bins >= 1, got {bins}")
    if values.size == 0:
        raise PreconditionError("no non-excluded LID values to bin")

    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    heights, edges = np.histogram(values, bins=bins, range=(lo, hi), density=True)
    centers = (edges[:-1] + edges[1:]) / 2

    return DensityCurve(
        grid=np.concatenate([[edges[0]], centers, [edges[-1]]]),
        density=np.concatenate([[heights[0]], heights, [heights[-1]]]),
        bandwidth=float(edges[1] - edges[0]),
        method="histogram",
    )


def lid_kde(
    lids: LidInput,
    grid_points: int = config.KDE_GRID_POINTS,
    bandwidth: Optional[float] = None,
) -> DensityCurve:
    """Gaussian kernel density of LID values

    Evaluated on a uniform grid over [min - 3h, max + 3h] and rescaled so
    the trapezoidal area is 1.

    Args:
        lids: LidVector or raw LID values
        grid_points: Number of grid points
        bandwidth: Kernel width h; Silverman's rule when omitted

    Returns:
        DensityCurve with method "kde_gaussian"
    """
    values = _lid_values(lids)
    if np.unique(values).size < 2:
        raise PreconditionError(
            "KDE needs at least two distinct LID values; use lid_histogram instead"
        )
    if grid_points < 2:
        raise PreconditionError(f"grid_points must be >= 2, got {grid_points}")

    h = silverman_bandwidth(values) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise PreconditionError(f"bandwidth must be positive, got {h}")

    grid = np.linspace(values.min() - 3 * h, values.max() + 3 * h, grid_points)
    density = np.zeros(grid_points)
    for start in range(0, values.size, KDE_CHUNK):
        chunk = values[start:start + KDE_CHUNK]
        density += norm.pdf((grid[:, None] - chunk[None, :]) / h).sum(axis=1)
    density /= values.size * h
    density /= trapezoid(density, grid)

    return DensityCurve(grid=grid, density=density, bandwidth=h, method="kde_gaussian")


def density_csv(curve: DensityCurve) -> str:
    """``x,density`` CSV for plotting tools"""
    frame = pd.DataFrame({"x": curve.grid, "density": curve.density})
    return frame.to_csv(index=False, float_format="%.9g", lineterminator="\n")
