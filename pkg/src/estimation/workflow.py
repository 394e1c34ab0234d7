"""Workflow orchestration for intrinsic dimension estimation"""
import logging
import re
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from src import __version__
from src.config import config
from src.errors import InputFormatError, PreconditionError
from src.estimation.knn import exact_knn
from src.estimation.lid import lid_all, summarize
from src.ingest.embedding_loader import load_embeddings
from src.ingest.sampling import sample_rows
from src.models.schemas import (
    EmbeddingMatrix, EstimationResult, ReportFile, RunConfig, SeriesPoint, SyntheticSpec
)
from src.report.rank import rank_suggestion

logger = logging.getLogger(__name__)


def step_from_filename(path: Path, pattern: str = config.STEP_PATTERN) -> int:
    """Training step encoded in a checkpoint file name

    Args:
        path: Checkpoint file
        pattern: Regex; its first capture group (or whole match) is the step

    Returns:
        The step number
    """
    match = re.search(pattern, Path(path).name)
    if match is None:
        raise InputFormatError(f"{path}: no step number matching '{pattern}' in the file name")
    token = match.group(1) if match.groups() else match.group(0)
    try:
        return int(token)
    except ValueError as e:
        raise InputFormatError(f"{path}: step '{token}' is not an integer") from e


class EstimationWorkflow:
    """Runs the estimation pipeline for one run configuration

    Workflow Steps:
    1. Sample - optional reproducible row subsample
    2. Neighbors - exact Euclidean k-NN table
    3. LID - per-row estimates with degenerate rows excluded
    4. Aggregate - harmonic-mean ID, redundancy and dispersion
    """

    def __init__(self, run: RunConfig):
        """Initialize workflow

        Args:
            run: Effective CLI settings
        """
        self.run = run

    def estimate_matrix(self, matrix: EmbeddingMatrix) -> EstimationResult:
        """Estimate the ID of an in-memory matrix

        Args:
            matrix: Matrix to analyze

        Returns:
            EstimationResult with the (possibly sampled) matrix, LIDs and report
        """
        run = self.run
        logger.info(f"Estimating ID of {matrix.source} ({matrix.rows}x{matrix.dim}, k={run.k})")

        if run.sample is not None:
            logger.info(f"Step 1: Sampling {run.sample} rows (seed={run.seed})...")
            matrix = sample_rows(matrix, run.sample, run.seed)

        logger.info("Step 2: Computing exact neighbor table...")
        table = exact_knn(matrix, run.k, threads=run.threads)

        logger.info("Step 3: Computing local intrinsic dimensions...")
        lids = lid_all(table, zero_eps=run.zero_eps, bias_corrected=run.bias_corrected)

        logger.info("Step 4: Aggregating global ID...")
        report = summarize(lids, matrix.dim)
        logger.info(
            f"✓ ID={report.id:.4f} ED={report.ed} "
            f"(used {report.n_used}, excluded {report.n_excluded})"
        )
        return EstimationResult(matrix=matrix, lids=lids, report=report)

    def estimate_file(self, path: Path) -> EstimationResult:
        """Load ``path`` in the configured format and estimate its ID"""
        return self.estimate_matrix(load_embeddings(path, self.run.format))

    def build_report_file(
        self,
        result: EstimationResult,
        synthetic: Optional[SyntheticSpec] = None,
        with_rank: bool = False,
    ) -> ReportFile:
        """JSON report document for an estimation result

        Args:
            result: Output of estimate_matrix
            synthetic: Spec of a generated input, echoed into the report
            with_rank: Include the low-rank adaptation suggestion

        Returns:
            ReportFile; contains no timestamps, so reruns are byte-identical
        """
        report = result.report
        return ReportFile(
            n=result.matrix.rows,
            d=result.matrix.dim,
            k=report.k,
            id=report.id,
            redundancy=report.redundancy,
            n_used=report.n_used,
            n_excluded=report.n_excluded,
            lid_stats=report.lid_stats,
            source=result.matrix.source,
            seed=self.run.seed,
            sample=self.run.sample,
            zero_eps=self.run.zero_eps,
            bias_corrected=report.bias_corrected,
            tool_version=__version__,
            synthetic=synthetic,
            rank_suggestion=rank_suggestion(report.id) if with_rank else None,
        )

    def run_series(
        self, paths: Sequence[Path], pattern: str = config.STEP_PATTERN
    ) -> List[SeriesPoint]:
        """Estimate every checkpoint and order the results by step

        Args:
            paths: Checkpoint embedding files
            pattern: Step-extraction regex for the file names

        Returns:
            SeriesPoints in ascending step order
        """
        if not paths:
            raise InputFormatError("no checkpoint files matched")

        stepped: List[Tuple[int, Path]] = sorted(
            ((step_from_filename(p, pattern), Path(p)) for p in paths), key=lambda sp: sp[0]
        )
        for (prev_step, prev), (step, path) in zip(stepped, stepped[1:]):
            if step == prev_step:
                raise PreconditionError(f"{prev} and {path} share step {step}")

        points = []
        for i, (step, path) in enumerate(stepped, start=1):
            logger.info(f"Checkpoint {i}/{len(stepped)}: step {step} ({path.name})")
            result = self.estimate_file(path)
            points.append(SeriesPoint(step=step, report=result.report, source=result.matrix.source))
        return points
