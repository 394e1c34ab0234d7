"""
Tests for density curves, redundancy tables, series CSV and rank suggestions
"""
import io
import math

import numpy as np
import pandas as pd
import pytest

from src.errors import PreconditionError
from src.estimation.knn import exact_knn
from src.estimation.lid import lid_all
from src.models.schemas import IdReport, LidStats, LidVector, SeriesPoint
from src.report.density import density_csv, lid_histogram, lid_kde, silverman_bandwidth
from src.report.rank import rank_suggestion
from src.report.tables import (
    SERIES_COLUMNS,
    format_redundancy_table,
    redundancy_table,
    series_report,
)
from src.synthetic.manifolds import gaussian_cloud

PUBLISHED_PAIRS = [
    ("pythia-14m", 128, 35.33, 72.40),
    ("pythia-70m", 512, 29.99, 94.14),
    ("pythia-160m", 768, 26.97, 96.49),
    ("pythia-410m", 1024, 24.95, 97.56),
    ("pythia-1b", 2048, 37.23, 98.18),
    ("pythia-1.4b", 2048, 32.20, 98.43),
    ("pythia-2.8b", 2560, 34.18, 98.66),
    ("pythia-6.9b", 4096, 78.30, 98.09),
    ("pythia-12b", 5120, 121.82, 97.62),
]


def _report(intrinsic: float, ed: int = 128) -> IdReport:
    stats = LidStats(mean=intrinsic, median=intrinsic, p5=intrinsic, p95=intrinsic, std=0.0)
    return IdReport(
        id=intrinsic, ed=ed, redundancy=(ed - intrinsic) / ed, k=5,
        n_used=100, n_excluded=0, lid_stats=stats,
    )


@pytest.fixture(scope="module")
def gaussian_lids() -> LidVector:
    return lid_all(exact_knn(gaussian_cloud(10_000, 300, seed=42), 5))


# Histogram
def test_histogram_constant_values():
    curve = lid_histogram([1.0, 1.0, 1.0, 1.0], bins=1)
    assert curve.method == "histogram"
    assert curve.integral() == pytest.approx(1.0, abs=1e-12)


def test_histogram_two_equal_mass_bins():
    curve = lid_histogram(np.arange(10.0), bins=2)
    heights = curve.density[1:-1]
    assert heights[0] == pytest.approx(heights[1])
    assert curve.bandwidth == pytest.approx(4.5)
    assert curve.integral() == pytest.approx(1.0, abs=1e-12)


def test_histogram_gaussian_lids_unimodal(gaussian_lids):
    curve = lid_histogram(gaussian_lids, bins=50)
    assert curve.integral() == pytest.approx(1.0, abs=1e-3)
    used = gaussian_lids.used_values()
    p25, p75 = np.percentile(used, [25, 75])
    mode = curve.grid[np.argmax(curve.density)]
    assert p25 <= mode <= p75


def test_histogram_errors():
    with pytest.raises(PreconditionError, match="no non-excluded"):
        lid_histogram([])
    with pytest.raises(PreconditionError, match="bins >= 1"):
        lid_histogram([1.0, 2.0], bins=0)


# KDE
def test_kde_two_points_symmetric():
    curve = lid_kde([0.0, 10.0], bandwidth=1.0)
    assert curve.at(0.0) == pytest.approx(curve.at(10.0), abs=1e-9)
    assert curve.grid[0] == pytest.approx(-3.0) and curve.grid[-1] == pytest.approx(13.0)


def test_kde_unit_integral(rng):
    for values in (rng.gamma(3.0, 2.0, 500), rng.uniform(1, 2, 40), [1.0, 2.0]):
        assert lid_kde(values).integral() == pytest.approx(1.0, abs=1e-3)


def test_kde_standard_normal_peak():
    values = np.random.default_rng(42).standard_normal(10_000)
    curve = lid_kde(values)
    assert curve.density.max() == pytest.approx(1 / math.sqrt(2 * math.pi), rel=0.10)
    assert curve.bandwidth == pytest.approx(silverman_bandwidth(values))


def test_kde_identical_values_suggest_histogram():
    with pytest.raises(PreconditionError, match="lid_histogram"):
        lid_kde([3.0, 3.0, 3.0])


def test_kde_skips_excluded_rows():
    lids = LidVector(k=3, values=[1.0, np.nan, 2.0, 4.0], excluded=[False, True, False, False])
    assert lid_kde(lids).integral() == pytest.approx(1.0, abs=1e-3)


def test_density_csv_columns():
    text = density_csv(lid_histogram([1.0, 2.0, 3.0], bins=3))
    frame = pd.read_csv(io.StringIO(text))
    assert list(frame.columns) == ["x", "density"]
    assert len(frame) == 5


# Redundancy table
def test_published_pairs_reproduced():
    rows = redundancy_table([(name, ed, intrinsic) for name, ed, intrinsic, _ in PUBLISHED_PAIRS])
    assert [r.name for r in rows] == [t[0] for t in PUBLISHED_PAIRS]
    for row, (_, _, _, pct) in zip(rows, PUBLISHED_PAIRS):
        assert row.redundancy_pct == pytest.approx(pct, abs=0.01)


def test_table_zero_redundancy_and_bad_row():
    rows = redundancy_table([("x", 100, 100), ("broken", 0, 5.0), ("y", 10, 5.0)])
    assert rows[0].redundancy_pct == 0.0
    assert rows[1].error and rows[1].redundancy_pct is None
    assert rows[2].redundancy_pct == 50.0


def test_table_params_and_rank():
    rows = redundancy_table([("pythia-410m", 1024, 24.95, 4.1e8)], with_rank=True)
    assert rows[0].log10_params == pytest.approx(math.log10(4.1e8))
    assert rows[0].rank == 25


def test_table_csv_reparses_to_formula():
    rows = redundancy_table([(name, ed, intrinsic) for name, ed, intrinsic, _ in PUBLISHED_PAIRS])
    frame = pd.read_csv(io.StringIO(format_redundancy_table(rows, "csv")))
    assert list(frame.columns) == ["model", "redundancy_pct", "id", "ed"]
    for record in frame.itertuples(index=False):
        exact = 100 * (record.ed - record.id) / record.ed
        assert abs(record.redundancy_pct - exact) <= 0.005 + 1e-9


def test_table_text_is_aligned():
    rows = redundancy_table([("pythia-14m", 128, 35.33), ("pythia-12b", 5120, 121.82)])
    text = format_redundancy_table(rows, "text")
    assert "pythia-14m" in text and "72.40" in text and "97.62" in text


def test_table_unknown_format():
    with pytest.raises(PreconditionError, match="unknown table format"):
        format_redundancy_table(redundancy_table([("x", 1, 1)]), "html")


# Series
def test_series_single_point():
    text = series_report([SeriesPoint(step=1000, report=_report(35.0))])
    lines = text.splitlines()
    assert lines[0] == ",".join(SERIES_COLUMNS)
    assert len(lines) == 2
    assert lines[1].startswith("1000,35,128,")


def test_series_unsorted_steps():
    points = [
        SeriesPoint(step=2000, report=_report(30.0)),
        SeriesPoint(step=1000, report=_report(35.0)),
    ]
    with pytest.raises(PreconditionError, match="strictly increasing"):
        series_report(points)


def test_series_empty():
    with pytest.raises(PreconditionError, match="at least one"):
        series_report([])


def test_series_id_column_round_trips():
    ids = [41.23456789, 37.0001234, 30.5, 24.95]
    points = [SeriesPoint(step=1000 * (i + 1), report=_report(v)) for i, v in enumerate(ids)]
    frame = pd.read_csv(io.StringIO(series_report(points)))
    assert list(frame["step"]) == [1000, 2000, 3000, 4000]
    np.testing.assert_allclose(frame["id"], ids, rtol=5e-6)
    assert (np.diff(frame["id"]) < 0).all()


# Rank suggestion
@pytest.mark.parametrize("intrinsic, recommended, probes", [
    (24.95, 25, [24, 25, 26, 32]),
    (8.0, 8, [7, 8, 9, 16]),
    (1.0, 1, [1, 2]),
])
def test_rank_suggestion(intrinsic, recommended, probes):
    suggestion = rank_suggestion(intrinsic)
    assert suggestion.recommended == recommended
    assert suggestion.probes == probes


def test_rank_never_below_id(rng):
    for intrinsic in rng.uniform(0.01, 500.0, 200):
        assert rank_suggestion(float(intrinsic)).recommended >= intrinsic


def test_rank_requires_positive_id():
    with pytest.raises(PreconditionError, match="positive"):
        rank_suggestion(0.0)
