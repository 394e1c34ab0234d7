"""Redundancy tables, training-dynamics series and flat report rows"""
import io
import math
from typing import Iterable, List, Sequence

import pandas as pd
from rich import box
from rich.console import Console
from rich.table import Table

from src.errors import PreconditionError
from src.estimation.lid import redundancy
from src.models.schemas import RedundancyRow, ReportFile, SeriesPoint
from src.report.rank import rank_suggestion

SERIES_COLUMNS = ["step", "id", "ed", "redundancy", "n_used", "n_excluded", "lid_mean", "lid_std"]


def redundancy_table(entries: Iterable[Sequence], with_rank: bool = False) -> List[RedundancyRow]:
    """Redundancy percentage per model, in input order

    Args:
        entries: (name, ED, ID) or (name, ED, ID, parameter count) tuples
        with_rank: Add the recommended adapter rank for each ID

    Returns:
        One row per entry; a row whose ED or ID is invalid carries an
        error instead of a percentage
    """
    rows = []
    for name, ed, intrinsic, *extra in entries:
        params = extra[0] if extra else None
        log10_params = math.log10(params) if params and params > 0 else None
        try:
            ratio = redundancy(ed, intrinsic)
        except PreconditionError as e:
            rows.append(RedundancyRow(name=name, ed=ed, id=intrinsic, params=params, error=str(e)))
            continue
        rows.append(RedundancyRow(
            name=name,
            ed=ed,
            id=intrinsic,
            redundancy_pct=round(100.0 * ratio, 2),
            params=params,
            log10_params=log10_params,
            rank=rank_suggestion(intrinsic).recommended if with_rank else None,
        ))
    return rows


def _table_frame(rows: List[RedundancyRow]) -> pd.DataFrame:
    records = []
    for row in rows:
        record = {
            "model": row.name,
            "redundancy_pct": "" if row.redundancy_pct is None else f"{row.redundancy_pct:.2f}",
            "id": "" if row.id is None else f"{row.id:.6g}",
            "ed": "" if row.ed is None else str(row.ed),
        }
        if any(r.params is not None for r in rows):
            record["params"] = "" if row.params is None else f"{row.params:.6g}"
            record["log10_params"] = "" if row.log10_params is None else f"{row.log10_params:.6g}"
        if any(r.rank is not None for r in rows):
            record["rank"] = "" if row.rank is None else str(row.rank)
        if any(r.error for r in rows):
            record["error"] = row.error or ""
        records.append(record)
    return pd.DataFrame.from_records(records)


def format_redundancy_table(rows: List[RedundancyRow], fmt: str = "text") -> str:
    """Render rows as CSV or as an aligned text table

    Args:
        rows: Output of redundancy_table
        fmt: "csv" or "text"

    Returns:
        The rendered table
    """
    frame = _table_frame(rows)
    if fmt == "csv":
        return frame.to_csv(index=False, lineterminator="\n")
    if fmt != "text":
        raise PreconditionError(f"unknown table format '{fmt}', expected csv or text")

    table = Table(box=box.SIMPLE, show_header=True, header_style="bold")
    for column in frame.columns:
        table.add_column(column, justify="left" if column in ("model", "error") else "right")
    for record in frame.itertuples(index=False):
        table.add_row(*record)

    buffer = io.StringIO()
    Console(file=buffer, width=160, color_system=None).print(table)
    return buffer.getvalue()


def series_report(points: List[SeriesPoint]) -> str:
    """CSV of ID against training step

    Args:
        points: Checkpoint reports with strictly increasing steps

    Returns:
        CSV text, floats at 6 significant digits
    """
    if not points:
        raise PreconditionError("a series needs at least one checkpoint")
    for prev, cur in zip(points, points[1:]):
        if cur.step <= prev.step:
            raise PreconditionError(
                f"steps must be strictly increasing, got {prev.step} then {cur.step}"
            )

    frame = pd.DataFrame.from_records(
        [
            {
                "step": p.step,
                "id": p.report.id,
                "ed": p.report.ed,
                "redundancy": p.report.redundancy,
                "n_used": p.report.n_used,
                "n_excluded": p.report.n_excluded,
                "lid_mean": p.report.lid_stats.mean,
                "lid_std": p.report.lid_stats.std,
            }
            for p in points
        ],
        columns=SERIES_COLUMNS,
    )
    return frame.to_csv(index=False, float_format="%.6g", lineterminator="\n")


def report_csv(report: ReportFile) -> str:
    """One-row CSV form of an estimate/baseline report"""
    record = report.model_dump(exclude={"lid_stats", "synthetic", "rank_suggestion"})
    for key, value in report.lid_stats.model_dump().items():
        record[f"lid_{key}"] = value
    return pd.DataFrame.from_records([record]).to_csv(index=False, lineterminator="\n")
