"""
Tests for the estimation workflow: sampling, checkpoint series and report files
"""
import json
from pathlib import Path

import numpy as np
import pytest

from src import __version__
from src.errors import InputFormatError, PreconditionError
from src.estimation.lid import estimate
from src.estimation.workflow import EstimationWorkflow, step_from_filename
from src.ingest.npy_format import write_npy
from src.models.schemas import RunConfig, SyntheticSpec
from src.synthetic.manifolds import embedded_hypercube, gaussian_cloud


def _workflow(**fields) -> EstimationWorkflow:
    return EstimationWorkflow(RunConfig(command="estimate", **fields))


def test_estimate_matrix_matches_library(small_matrix):
    result = _workflow(k=5).estimate_matrix(small_matrix)
    assert result.report == estimate(small_matrix, k=5)
    assert result.matrix is small_matrix
    assert result.lids.n == small_matrix.rows


def test_sampled_estimation():
    matrix = gaussian_cloud(2000, 16, seed=1)
    first = _workflow(sample=500, seed=9).estimate_matrix(matrix)
    second = _workflow(sample=500, seed=9).estimate_matrix(matrix)
    assert first.matrix.rows == 500
    assert first.report == second.report
    assert "sample 500" in first.matrix.source


def test_build_report_file(small_matrix):
    workflow = _workflow(k=5, seed=7)
    result = workflow.estimate_matrix(small_matrix)
    spec = SyntheticSpec(kind="gaussian", n=300, d=12, seed=7)
    report = workflow.build_report_file(result, synthetic=spec, with_rank=True)

    assert (report.n, report.d, report.k, report.seed) == (300, 12, 5, 7)
    assert report.tool_version == __version__
    assert report.synthetic == spec
    assert report.rank_suggestion.recommended >= report.id
    document = json.loads(report.model_dump_json())
    assert "timestamp" not in document
    assert set(document["lid_stats"]) == {"mean", "median", "p5", "p95", "std"}


def test_report_matches_published_schema(small_matrix):
    schema = json.loads((Path(__file__).parent / "schemas" / "id_report.schema.json").read_text())
    workflow = _workflow()
    report = workflow.build_report_file(workflow.estimate_matrix(small_matrix))
    document = json.loads(report.model_dump_json())
    assert set(schema["required"]) <= set(document)
    assert set(document) <= set(schema["properties"])


@pytest.mark.parametrize("name, pattern, step", [
    ("step1000.npy", r"step(\d+)", 1000),
    ("ckpt_step42_final.csv", r"step(\d+)", 42),
    ("model-07.npy", r"-(\d+)\.", 7),
])
def test_step_from_filename(name, pattern, step):
    assert step_from_filename(Path(name), pattern) == step


def test_step_missing_names_the_file():
    with pytest.raises(InputFormatError, match="final.npy"):
        step_from_filename(Path("final.npy"))


def test_series_orders_by_step(tmp_path):
    paths = []
    for step, m in [(3000, 5), (1000, 20), (2000, 10)]:
        path = tmp_path / f"step{step}.npy"
        write_npy(embedded_hypercube(2000, m, 50, seed=step), path)
        paths.append(path)

    points = EstimationWorkflow(RunConfig(command="series")).run_series(paths)
    assert [p.step for p in points] == [1000, 2000, 3000]
    ids = [p.report.id for p in points]
    assert ids[0] > ids[1] > ids[2]


def test_series_duplicate_steps(tmp_path):
    a, b = tmp_path / "a_step5.npy", tmp_path / "b_step5.npy"
    for path in (a, b):
        write_npy(gaussian_cloud(20, 3, seed=0), path)
    with pytest.raises(PreconditionError, match="share step 5"):
        EstimationWorkflow(RunConfig(command="series")).run_series([a, b])


def test_series_requires_files():
    with pytest.raises(InputFormatError, match="no checkpoint files"):
        EstimationWorkflow(RunConfig(command="series")).run_series([])


def test_run_config_sample_bound():
    with pytest.raises(ValueError, match="at least k\\+1"):
        RunConfig(command="estimate", k=5, sample=5)


@pytest.mark.parametrize("threads", [0, -2])
def test_run_config_thread_count(threads):
    with pytest.raises(ValueError, match="must be -1"):
        RunConfig(command="estimate", threads=threads)
    assert RunConfig(command="estimate", threads=-1).threads == -1


def test_estimate_file_declared_format(tmp_path, write_text):
    path = write_text("tiny.txt", "4 2\na 0 0\nb 1 0\nc 0 3\nd 7 7\n")
    result = _workflow(k=2, format="word2vec").estimate_file(path)
    assert result.report.ed == 2
    assert result.matrix.labels == ["a", "b", "c", "d"]
    assert np.isfinite(result.report.id)
