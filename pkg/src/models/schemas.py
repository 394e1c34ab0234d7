"""Pydantic models for embedding matrices, estimates and reports"""
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.integrate import trapezoid

from src.config import config


def _readonly(value, dtype) -> np.ndarray:
    """Copy into a C-contiguous array of ``dtype`` and lock it"""
    arr = np.array(value, dtype=dtype, copy=True, order="C")
    arr.setflags(write=False)
    return arr


SEED_BOUNDS = {"ge": 0, "lt": 2**64}


# Core data
class EmbeddingMatrix(BaseModel):
    """n x d matrix of row vectors with optional row labels"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    data: np.ndarray = Field(description="n x d float64 embedding coordinates")
    labels: Optional[List[str]] = Field(default=None, description="One token per row")
    source: str = Field(default="", description="Provenance: path and format")
    storage_dtype: Literal["<f4", "<f8"] = Field(
        default="<f8", description="Precision the values were stored with on disk"
    )

    @field_validator("data", mode="before")
    @classmethod
    def _coerce_data(cls, value):
        arr = np.array(value, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"matrix needs at least one row and one column, got {arr.shape}")
        finite_rows = np.isfinite(arr).all(axis=1)
        if not finite_rows.all():
            row = int(np.flatnonzero(~finite_rows)[0]) + 1
            raise ValueError(f"non-finite value at row {row}")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_labels(self):
        if self.labels is not None and len(self.labels) != self.data.shape[0]:
            raise ValueError(
                f"label count {len(self.labels)} does not match row count {self.data.shape[0]}"
            )
        return self

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        """Extrinsic dimension (ED)"""
        return int(self.data.shape[1])


class NeighborTable(BaseModel):
    """Per-row k nearest neighbors, distances sorted ascending"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k: int = Field(ge=1, description="Neighbor count")
    indices: np.ndarray = Field(description="n x k neighbor row indices")
    distances: np.ndarray = Field(description="n x k Euclidean distances")

    @field_validator("indices", mode="before")
    @classmethod
    def _coerce_indices(cls, value):
        return _readonly(value, np.int64)

    @field_validator("distances", mode="before")
    @classmethod
    def _coerce_distances(cls, value):
        return _readonly(value, np.float64)

    @model_validator(mode="after")
    def _check_table(self):
        idx, dist = self.indices, self.distances
        if idx.ndim != 2 or idx.shape != dist.shape or idx.shape[1] != self.k:
            raise ValueError(
                f"indices {idx.shape} and distances {dist.shape} must both be (n, {self.k})"
            )
        rows = np.arange(idx.shape[0])[:, None]
        if (idx == rows).any():
            raise ValueError("a row lists itself as a neighbor")
        if not np.isfinite(dist).all() or (dist < 0).any():
            raise ValueError("distances must be finite and nonnegative")
        if (np.diff(dist, axis=1) < 0).any():
            raise ValueError("distances must be sorted ascending per row")
        if (np.diff(np.sort(idx, axis=1), axis=1) == 0).any():
            raise ValueError("neighbor indices must be distinct per row")
        return self

    @property
    def n(self) -> int:
        return int(self.indices.shape[0])


class LidVector(BaseModel):
    """Per-row LID estimates; excluded (degenerate) rows hold NaN"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k: int = Field(ge=2, description="Neighbor count used")
    values: np.ndarray = Field(description="LID per row, NaN where excluded")
    excluded: np.ndarray = Field(description="True for degenerate rows")
    bias_corrected: bool = Field(default=False, description="1/(k-2) normalization used")

    @field_validator("values", mode="before")
    @classmethod
    def _coerce_values(cls, value):
        return _readonly(value, np.float64)

    @field_validator("excluded", mode="before")
    @classmethod
    def _coerce_excluded(cls, value):
        return _readonly(value, np.bool_)

    @model_validator(mode="after")
    def _check_values(self):
        if self.values.ndim != 1 or self.values.shape != self.excluded.shape:
            raise ValueError("values and excluded must be 1-D arrays of equal length")
        kept = self.values[~self.excluded]
        if not (np.isfinite(kept).all() and (kept > 0).all()):
            raise ValueError("every non-excluded LID must be finite and positive")
        if not np.isnan(self.values[self.excluded]).all():
            raise ValueError("excluded rows must not carry a value")
        return self

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_excluded(self) -> int:
        return int(self.excluded.sum())

    @property
    def n_used(self) -> int:
        return self.n - self.n_excluded

    def used_values(self) -> np.ndarray:
        """LIDs of non-excluded rows, in row order"""
        return self.values[~self.excluded]


# Estimates and reports
class LidStats(BaseModel):
    """Dispersion of non-excluded LIDs"""

    mean: float = Field(description="Arithmetic mean (diagnostic only)")
    median: float
    p5: float
    p95: float
    std: float = Field(description="Population standard deviation")


class IdReport(BaseModel):
    """Global ID, ED and redundancy for one matrix"""

    id: float = Field(description="Harmonic-mean global intrinsic dimension")
    ed: int = Field(ge=1, description="Extrinsic dimension")
    redundancy: float = Field(description="(ed - id) / ed")
    k: int = Field(ge=2)
    n_used: int = Field(ge=1)
    n_excluded: int = Field(ge=0)
    lid_stats: LidStats
    bias_corrected: bool = False

    @model_validator(mode="after")
    def _check_redundancy(self):
        if abs(self.redundancy - (self.ed - self.id) / self.ed) > 1e-12:
            raise ValueError("redundancy is inconsistent with id and ed")
        return self


class SyntheticSpec(BaseModel):
    """Recipe for a synthetic point cloud of known structure"""

    kind: Literal["gaussian", "hypercube"]
    n: int = Field(ge=1, description="Point count")
    d: int = Field(ge=1, description="Ambient dimension D")
    m: Optional[int] = Field(default=None, ge=1, description="Intrinsic dimension (hypercube)")
    seed: int = Field(default=config.DEFAULT_SEED, **SEED_BOUNDS)

    @model_validator(mode="after")
    def _check_dims(self):
        if self.kind == "hypercube":
            if self.m is None:
                raise ValueError("hypercube needs an intrinsic dimension m")
            if self.m > self.d:
                raise ValueError(f"m={self.m} must not exceed d={self.d}")
        return self


class RankSuggestion(BaseModel):
    """Low-rank adaptation ranks derived from a global ID"""

    id: float
    recommended: int = Field(description="Smallest rank not below the ID")
    probes: List[int] = Field(description="Ranks worth sweeping, ascending")


class ReportFile(BaseModel):
    """JSON document written by the estimate and baseline commands"""

    n: int
    d: int
    k: int
    id: float
    redundancy: float
    n_used: int
    n_excluded: int
    lid_stats: LidStats
    source: str
    seed: int
    sample: Optional[int] = None
    zero_eps: float
    bias_corrected: bool = False
    tool_version: str
    synthetic: Optional[SyntheticSpec] = None
    rank_suggestion: Optional[RankSuggestion] = None


class DensityCurve(BaseModel):
    """Density of LID values evaluated on an ascending grid"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float = Field(gt=0, description="Kernel width or bin width")
    method: Literal["kde_gaussian", "histogram"]

    @field_validator("grid", "density", mode="before")
    @classmethod
    def _coerce(cls, value):
        return _readonly(value, np.float64)

    @model_validator(mode="after")
    def _check_curve(self):
        if self.grid.ndim != 1 or self.grid.shape != self.density.shape or self.grid.size < 2:
            raise ValueError("grid and density must be 1-D of equal length >= 2")
        if not (np.diff(self.grid) > 0).all():
            raise ValueError("grid must be strictly ascending")
        if not np.isfinite(self.density).all() or (self.density < 0).any():
            raise ValueError("density must be finite and nonnegative")
        return self

    def integral(self) -> float:
        """Trapezoidal area under the curve"""
        return float(trapezoid(self.density, self.grid))

    def at(self, x):
        """Density at ``x`` by linear interpolation (0 outside the grid)"""
        return np.interp(x, self.grid, self.density, left=0.0, right=0.0)


class SeriesPoint(BaseModel):
    """One checkpoint of a training-dynamics curve"""

    step: int = Field(ge=0)
    report: IdReport
    source: str = ""


class RedundancyRow(BaseModel):
    """One model's row in a redundancy table; ``error`` set when it failed"""

    name: str
    ed: Optional[int] = None
    id: Optional[float] = None
    redundancy_pct: Optional[float] = None
    params: Optional[float] = None
    log10_params: Optional[float] = None
    rank: Optional[int] = Field(default=None, description="Recommended minimum adapter rank")
    error: Optional[str] = None


# CLI run configuration
class RunConfig(BaseModel):
    """Effective settings of one CLI invocation"""

    command: Literal["estimate", "baseline", "synth", "series", "compare"]
    inputs: List[str] = Field(default_factory=list)
    format: Literal["word2vec", "glove", "npy", "csv", "auto"] = "auto"
    k: int = Field(default=config.DEFAULT_K, ge=2)
    sample: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=config.DEFAULT_SEED, **SEED_BOUNDS)
    zero_eps: float = Field(default=config.ZERO_EPS, ge=0)
    threads: int = config.THREADS
    bias_corrected: bool = False
    output: Optional[str] = None
    output_format: Literal["json", "csv", "text"] = "json"

    @field_validator("threads")
    @classmethod
    def _check_threads(cls, v: int) -> int:
        if v != -1 and v < 1:
            raise ValueError(f"threads={v} must be -1 (all cores) or >= 1")
        return v

    @model_validator(mode="after")
    def _check_sample(self):
        if self.sample is not None and self.sample < self.k + 1:
            raise ValueError(f"sample={self.sample} must be at least k+1={self.k + 1}")
        return self


# Workflow output
class EstimationResult(BaseModel):
    """Everything one estimation run produced"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: EmbeddingMatrix = Field(description="Matrix actually estimated (after sampling)")
    lids: LidVector
    report: IdReport
