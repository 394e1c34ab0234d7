"""Command-line interface for embedding intrinsic dimension analysis

Run with ``python -m src.main <command> --help``.
Exit codes: 0 success, 1 input/parse error, 2 precondition violation,
3 internal invariant failure.
"""
import glob
import json
import logging
from pathlib import Path
from typing import Annotated, Callable, Dict, List, Optional, Tuple

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from src import TOOL_NAME, __version__
from src.config import config
from src.errors import EmbeddingIdError, InputFormatError, PreconditionError
from src.estimation.workflow import EstimationWorkflow
from src.ingest.npy_format import write_npy
from src.models.schemas import (
    EstimationResult,
    RedundancyRow,
    ReportFile,
    RunConfig,
    SyntheticSpec,
)
from src.report.density import density_csv, lid_histogram, lid_kde
from src.report.tables import format_redundancy_table, redundancy_table, report_csv, series_report
from src.synthetic.manifolds import generate

app = typer.Typer(
    name=TOOL_NAME,
    help="Estimate the intrinsic dimension of embedding matrices",
    add_completion=False,
)

err_console = Console(stderr=True)
logger = logging.getLogger(__name__)


@app.callback()
def main(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging")] = False,
):
    """Configure logging for every command"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else config.LOG_LEVEL,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False, show_time=False)],
        force=True,
    )


def _guarded(action: Callable[[], None]) -> None:
    """Run a command body, mapping failures onto the exit-code contract"""
    try:
        action()
    except EmbeddingIdError as e:
        err_console.print(f"✗ {e}", style="red", markup=False, highlight=False, soft_wrap=True)
        raise typer.Exit(code=e.exit_code)
    except ValidationError as e:
        err_console.print(f"✗ invalid value: {e}", style="red", markup=False, soft_wrap=True)
        raise typer.Exit(code=2)


def _run_config(**fields) -> RunConfig:
    try:
        return RunConfig(**fields)
    except ValidationError as e:
        raise PreconditionError(f"invalid options: {e}") from e


def _synthetic_spec(**fields) -> SyntheticSpec:
    try:
        return SyntheticSpec(**fields)
    except ValidationError as e:
        raise PreconditionError(f"invalid synthetic spec: {e}") from e


def _write(text: str, output: Optional[Path]) -> None:
    if output is None:
        typer.echo(text, nl=not text.endswith("\n"))
    else:
        output.write_text(text, encoding="utf-8")
        logger.info(f"✓ Wrote {output}")


def _emit_estimate(
    workflow: EstimationWorkflow,
    result: EstimationResult,
    report: ReportFile,
    density: Optional[Path],
    density_method: str,
) -> None:
    """Write the report, optional density curve, and the summary line"""
    run = workflow.run
    if run.output_format == "csv":
        text = report_csv(report)
    elif run.output_format == "json":
        text = report.model_dump_json(indent=2) + "\n"
    else:
        raise PreconditionError(f"output format '{run.output_format}' not supported here")

    output = Path(run.output) if run.output else None
    _write(text, output)

    if density is not None:
        if density_method == "kde":
            curve = lid_kde(result.lids)
        elif density_method == "histogram":
            curve = lid_histogram(result.lids)
        else:
            raise PreconditionError(f"unknown density method '{density_method}'")
        density.write_text(density_csv(curve), encoding="utf-8")
        logger.info(f"✓ Wrote {density_method} density ({curve.grid.size} points) to {density}")

    summary = f"ID={report.id:.4f} ED={report.d} redundancy={100 * report.redundancy:.2f}%"
    if report.rank_suggestion is not None:
        probes = ",".join(str(p) for p in report.rank_suggestion.probes)
        summary += f" rank={report.rank_suggestion.recommended} probes={probes}"
    # Keep stdout parseable when the report itself goes there
    typer.echo(summary, err=output is None)


FormatOption = Annotated[
    str, typer.Option("--format", "-f", help="word2vec, glove, npy, csv or auto")
]
KOption = Annotated[int, typer.Option("--k", "-k", help="Neighbors per point")]
SeedOption = Annotated[int, typer.Option("--seed", help="Seed for sampling and generation")]
SampleOption = Annotated[
    Optional[int], typer.Option("--sample", help="Estimate on this many sampled rows")
]
ZeroEpsOption = Annotated[float, typer.Option("--zero-eps", help="Distances below count as zero")]
ThreadsOption = Annotated[int, typer.Option("--threads", help="k-NN worker threads, -1 = all")]
BiasOption = Annotated[bool, typer.Option("--bias-corrected", help="Use 1/(k-2) normalization")]
OutputOption = Annotated[Optional[Path], typer.Option("--output", "-o", help="Output file")]
DensityOption = Annotated[
    Optional[Path], typer.Option("--density", help="Also write the LID density curve as CSV")
]
DensityMethodOption = Annotated[
    str, typer.Option("--density-method", help="kde or histogram")
]
RankOption = Annotated[bool, typer.Option("--rank", help="Add a low-rank adaptation suggestion")]


@app.command()
def estimate(
    path: Annotated[Path, typer.Argument(help="Embedding matrix file")],
    fmt: FormatOption = "auto",
    k: KOption = config.DEFAULT_K,
    sample: SampleOption = None,
    seed: SeedOption = config.DEFAULT_SEED,
    zero_eps: ZeroEpsOption = config.ZERO_EPS,
    threads: ThreadsOption = config.THREADS,
    bias_corrected: BiasOption = False,
    output: OutputOption = None,
    output_format: Annotated[str, typer.Option("--output-format", help="json or csv")] = "json",
    density: DensityOption = None,
    density_method: DensityMethodOption = "kde",
    rank: RankOption = False,
):
    """Estimate the ID of one embedding matrix"""

    def action():
        run = _run_config(
            command="estimate", inputs=[str(path)], format=fmt, k=k, sample=sample, seed=seed,
            zero_eps=zero_eps, threads=threads, bias_corrected=bias_corrected,
            output=str(output) if output else None, output_format=output_format,
        )
        workflow = EstimationWorkflow(run)
        result = workflow.estimate_file(path)
        report = workflow.build_report_file(result, with_rank=rank)
        _emit_estimate(workflow, result, report, density, density_method)

    _guarded(action)


@app.command()
def baseline(
    dim: Annotated[int, typer.Option("--dim", "-d", help="Ambient dimension")] = 300,
    n: Annotated[int, typer.Option("--n", "-n", help="Number of Gaussian points")] = 100_000,
    k: KOption = config.DEFAULT_K,
    seed: SeedOption = config.DEFAULT_SEED,
    zero_eps: ZeroEpsOption = config.ZERO_EPS,
    threads: ThreadsOption = config.THREADS,
    bias_corrected: BiasOption = False,
    output: OutputOption = None,
    output_format: Annotated[str, typer.Option("--output-format", help="json or csv")] = "json",
    density: DensityOption = None,
    density_method: DensityMethodOption = "kde",
    rank: RankOption = False,
):
    """Estimate the ID of a standard Gaussian cloud (random baseline)"""

    def action():
        spec = _synthetic_spec(kind="gaussian", n=n, d=dim, seed=seed)
        run = _run_config(
            command="baseline", k=k, seed=seed, zero_eps=zero_eps, threads=threads,
            bias_corrected=bias_corrected, output=str(output) if output else None,
            output_format=output_format,
        )
        workflow = EstimationWorkflow(run)
        result = workflow.estimate_matrix(generate(spec))
        report = workflow.build_report_file(result, synthetic=spec, with_rank=rank)
        _emit_estimate(workflow, result, report, density, density_method)

    _guarded(action)


@app.command()
def synth(
    output: Annotated[Path, typer.Option("--output", "-o", help="npy file to write")],
    kind: Annotated[str, typer.Option("--kind", help="gaussian or hypercube")] = "gaussian",
    n: Annotated[int, typer.Option("--n", "-n", help="Number of points")] = 10_000,
    dim: Annotated[int, typer.Option("--dim", "-d", help="Ambient dimension D")] = 300,
    m: Annotated[Optional[int], typer.Option("--m", help="Intrinsic dimension (hypercube)")] = None,
    seed: SeedOption = config.DEFAULT_SEED,
):
    """Write a synthetic point cloud as float64 npy v1.0"""

    def action():
        spec = _synthetic_spec(kind=kind, n=n, d=dim, m=m, seed=seed)
        try:
            write_npy(generate(spec), output)
        except OSError as e:
            raise InputFormatError(f"cannot write {output}: {e}") from e
        typer.echo(spec.model_dump_json())

    _guarded(action)


@app.command()
def series(
    pattern: Annotated[str, typer.Argument(help="Glob of checkpoint files, e.g. 'ckpt/step*.npy'")],
    step_pattern: Annotated[
        str, typer.Option("--step-pattern", help="Regex capturing the step in file names")
    ] = config.STEP_PATTERN,
    fmt: FormatOption = "auto",
    k: KOption = config.DEFAULT_K,
    sample: SampleOption = None,
    seed: SeedOption = config.DEFAULT_SEED,
    zero_eps: ZeroEpsOption = config.ZERO_EPS,
    threads: ThreadsOption = config.THREADS,
    bias_corrected: BiasOption = False,
    output: OutputOption = None,
):
    """Track ID across a series of checkpoint embedding matrices"""

    def action():
        paths = sorted(glob.glob(pattern))
        if not paths:
            raise InputFormatError(f"no files match '{pattern}'")
        run = _run_config(
            command="series", inputs=paths, format=fmt, k=k, sample=sample, seed=seed,
            zero_eps=zero_eps, threads=threads, bias_corrected=bias_corrected,
            output=str(output) if output else None, output_format="csv",
        )
        points = EstimationWorkflow(run).run_series([Path(p) for p in paths], step_pattern)
        _write(series_report(points), output)

    _guarded(action)


def _named(items: Optional[List[str]], what: str) -> List[Tuple[str, str]]:
    """Split NAME=VALUE options"""
    pairs = []
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name or not value:
            raise PreconditionError(f"{what} '{item}' must look like NAME=VALUE")
        pairs.append((name, value))
    return pairs


@app.command()
def compare(
    inputs: Annotated[
        Optional[List[str]], typer.Option("--input", "-i", help="NAME=PATH of a matrix to estimate")
    ] = None,
    entries: Annotated[
        Optional[List[str]], typer.Option("--entry", "-e", help="NAME=ED:ID of a known estimate")
    ] = None,
    params: Annotated[
        Optional[List[str]], typer.Option("--params", "-p", help="NAME=COUNT model parameters")
    ] = None,
    fmt: FormatOption = "auto",
    k: KOption = config.DEFAULT_K,
    sample: SampleOption = None,
    seed: SeedOption = config.DEFAULT_SEED,
    zero_eps: ZeroEpsOption = config.ZERO_EPS,
    threads: ThreadsOption = config.THREADS,
    output: OutputOption = None,
    output_format: Annotated[str, typer.Option("--output-format", help="text or csv")] = "text",
    rank: RankOption = False,
):
    """Redundancy table across models"""

    def action():
        named_inputs = _named(inputs, "--input")
        named_entries = _named(entries, "--entry")
        if not named_inputs and not named_entries:
            raise PreconditionError("compare needs at least one --input or --entry")
        param_counts: Dict[str, float] = {}
        for name, value in _named(params, "--params"):
            try:
                param_counts[name] = float(value)
            except ValueError as e:
                raise PreconditionError(f"--params {name}: '{value}' is not a number") from e

        run = _run_config(
            command="compare", inputs=[p for _, p in named_inputs], format=fmt, k=k,
            sample=sample, seed=seed, zero_eps=zero_eps, threads=threads,
            output=str(output) if output else None, output_format=output_format,
        )
        if output_format not in ("text", "csv"):
            raise PreconditionError(f"output format '{output_format}' not supported for compare")
        workflow = EstimationWorkflow(run)

        rows: List[RedundancyRow] = []
        for name, path in named_inputs:
            try:
                report = workflow.estimate_file(Path(path)).report
            except EmbeddingIdError as e:
                logger.error(f"✗ {name}: {e}")
                rows.append(RedundancyRow(name=name, error=str(e)))
                continue
            entry = (name, report.ed, report.id, param_counts.get(name))
            rows.extend(redundancy_table([entry], with_rank=rank))

        for name, value in named_entries:
            ed_text, _, id_text = value.partition(":")
            try:
                ed, intrinsic = int(ed_text), float(id_text)
            except ValueError:
                rows.append(RedundancyRow(name=name, error=f"entry '{value}' must look like ED:ID"))
                continue
            entry = (name, ed, intrinsic, param_counts.get(name))
            rows.extend(redundancy_table([entry], with_rank=rank))

        _write(format_redundancy_table(rows, output_format), output)

        if all(row.error for row in rows):
            raise InputFormatError("every compare input failed")

    _guarded(action)


@app.command()
def schema():
    """Print the JSON schema of estimate/baseline reports"""
    typer.echo(json.dumps(ReportFile.model_json_schema(), indent=2))


@app.command()
def version():
    """Print the tool version"""
    typer.echo(f"{TOOL_NAME} {__version__}")


if __name__ == "__main__":
    app()
