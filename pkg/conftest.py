"""Shared pytest fixtures for the embedding ID test suite"""
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from src.models.schemas import EmbeddingMatrix


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run full-scale (n=1e5) checks"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale run, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def write_text(tmp_path: Path) -> Callable[[str, str], Path]:
    """Write ``content`` to ``tmp_path / name`` and return the path"""

    def _write(name: str, content: str) -> Path:
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def small_matrix(rng) -> EmbeddingMatrix:
    """300 Gaussian rows in 12 dimensions"""
    return EmbeddingMatrix(data=rng.standard_normal((300, 12)), source="fixture")


def naive_knn(data: np.ndarray, k: int):
    """Full-sort neighbor oracle: direct distances, lower index wins ties"""
    n = data.shape[0]
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k))
    others = np.arange(n)
    for i in range(n):
        diff = data - data[i]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        mask = others != i
        cand_idx, cand_dist = others[mask], dist[mask]
        order = np.lexsort((cand_idx, cand_dist))[:k]
        indices[i] = cand_idx[order]
        distances[i] = cand_dist[order]
    return indices, distances


@pytest.fixture
def knn_oracle():
    return naive_knn
