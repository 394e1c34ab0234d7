"""Embedding matrix loading from word2vec, GloVe, CSV and npy files"""
import logging
import re
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.errors import InputFormatError
from src.ingest.npy_format import NPY_MAGIC, load_npy
from src.models.schemas import EmbeddingMatrix

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _numbered_lines(path: Path) -> Iterator[Tuple[int, List[str]]]:
    """Yield (line number, whitespace-split fields), skipping blank lines

    Labels are informational, so undecodable bytes are replaced.
    """
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        for line_no, line in enumerate(f, start=1):
            fields = line.split()
            if fields:
                yield line_no, fields


def _parse_row(fields: List[str], d: int, row_no: int, line_no: int, path: Path) -> np.ndarray:
    """Parse ``token v1 ... vd`` into a float64 vector"""
    got = len(fields) - 1
    if got != d:
        raise InputFormatError(
            f"{path}: line {line_no} (row {row_no}) has d={got} values, expected {d}"
        )
    try:
        values = np.array(fields[1:], dtype=np.float64)
    except ValueError as e:
        raise InputFormatError(f"{path}: line {line_no} (row {row_no}): {e}") from e
    if not np.isfinite(values).all():
        raise InputFormatError(f"{path}: non-finite value at row {row_no} (line {line_no})")
    return values


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_word2vec_text(path: PathLike) -> EmbeddingMatrix:
    """Load the word2vec text format: header ``n d`` then ``token v1 ... vd``

    Args:
        path: File to read

    Returns:
        EmbeddingMatrix with n rows, d columns and token labels
    """
    path = Path(path)
    lines = _numbered_lines(path)

    header = next(lines, None)
    if header is None:
        raise InputFormatError(f"{path}: empty file, expected an 'n d' header")
    line_no, fields = header
    if len(fields) != 2 or not all(f.isdigit() for f in fields):
        raise InputFormatError(
            f"{path}: malformed header on line {line_no}, expected two integers 'n d'"
        )
    n, d = int(fields[0]), int(fields[1])
    if n == 0 or d == 0:
        raise InputFormatError(f"{path}: header declares n={n}, d={d}; both must be >= 1")

    data = np.empty((n, d), dtype=np.float64)
    labels: List[str] = []
    for row_no, (line_no, fields) in enumerate(lines, start=1):
        if row_no > n:
            raise InputFormatError(
                f"{path}: line {line_no} is row {row_no} but the header declares n={n}"
            )
        data[row_no - 1] = _parse_row(fields, d, row_no, line_no, path)
        labels.append(fields[0])

    if len(labels) != n:
        raise InputFormatError(f"{path}: header declares n={n} rows, found {len(labels)}")

    logger.info(f"✓ Loaded word2vec matrix {n}x{d} from {path.name}")
    return EmbeddingMatrix(data=data, labels=labels, source=f"{path} (word2vec)")


def load_glove_text(path: PathLike) -> EmbeddingMatrix:
    """Load the GloVe text format: ``token v1 ... vd`` per line, no header

    Args:
        path: File to read

    Returns:
        EmbeddingMatrix with one row per line; d taken from the first line
    """
    path = Path(path)
    rows: List[np.ndarray] = []
    labels: List[str] = []
    d: Optional[int] = None

    for row_no, (line_no, fields) in enumerate(_numbered_lines(path), start=1):
        if d is None:
            d = len(fields) - 1
            if d < 1:
                raise InputFormatError(f"{path}: line {line_no} has a token but no values")
        rows.append(_parse_row(fields, d, row_no, line_no, path))
        labels.append(fields[0])

    if not rows:
        raise InputFormatError(f"{path}: no rows")

    logger.info(f"✓ Loaded GloVe matrix {len(rows)}x{d} from {path.name}")
    return EmbeddingMatrix(data=np.vstack(rows), labels=labels, source=f"{path} (glove)")


def load_csv(path: PathLike) -> EmbeddingMatrix:
    """Load comma-separated floats with an optional leading label column

    The label column is detected from the first cell of the first line.

    Args:
        path: File to read

    Returns:
        EmbeddingMatrix, labelled iff the first column is non-numeric
    """
    path = Path(path)
    try:
        df = pd.read_csv(
            path,
            header=None,
            dtype=str,
            na_filter=False,
            skip_blank_lines=True,
            skipinitialspace=True,
            encoding="utf-8",
            encoding_errors="replace",
        )
    except pd.errors.EmptyDataError as e:
        raise InputFormatError(f"{path}: no rows") from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        where = f"row {match.group(1)}" if match else "row"
        raise InputFormatError(f"{path}: ragged {where}: {e}") from e

    # Short rows come back padded
    missing = df.isna().to_numpy() | (df.astype(str).to_numpy() == "")
    if missing.any():
        row_no = int(np.flatnonzero(missing.any(axis=1))[0]) + 1
        raise InputFormatError(f"{path}: ragged row {row_no}: fewer fields than row 1")

    has_labels = not _is_number(str(df.iat[0, 0]))
    values = df.iloc[:, 1:] if has_labels else df
    if values.shape[1] == 0:
        raise InputFormatError(f"{path}: label column but no values")

    try:
        data = values.to_numpy(dtype=object).astype(np.float64)
    except ValueError as e:
        for row_no, row in enumerate(values.itertuples(index=False), start=1):
            try:
                np.array(row, dtype=np.float64)
            except ValueError as row_error:
                raise InputFormatError(f"{path}: row {row_no}: {row_error}") from row_error
        raise InputFormatError(f"{path}: {e}") from e

    finite_rows = np.isfinite(data).all(axis=1)
    if not finite_rows.all():
        row_no = int(np.flatnonzero(~finite_rows)[0]) + 1
        raise InputFormatError(f"{path}: non-finite value at row {row_no}")

    labels = df.iloc[:, 0].tolist() if has_labels else None
    logger.info(f"✓ Loaded CSV matrix {data.shape[0]}x{data.shape[1]} from {path.name}")
    return EmbeddingMatrix(data=data, labels=labels, source=f"{path} (csv)")


LOADERS: Dict[str, Callable[[PathLike], EmbeddingMatrix]] = {
    "word2vec": load_word2vec_text,
    "glove": load_glove_text,
    "npy": load_npy,
    "csv": load_csv,
}


def detect_format(path: PathLike) -> str:
    """Guess the file format from its content

    Order: npy magic bytes, word2vec ``n d`` header, then CSV vs GloVe by
    delimiter. Content that fits two formats equally is an error.

    Args:
        path: File to inspect

    Returns:
        One of the LOADERS keys
    """
    path = Path(path)
    with open(path, "rb") as f:
        if f.read(len(NPY_MAGIC)) == NPY_MAGIC:
            return "npy"

    head: List[str] = []
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        for line in f:
            if line.strip():
                head.append(line.strip())
            if len(head) == 2:
                break
    if not head:
        raise InputFormatError(f"{path}: empty file")

    first = head[0]
    fields = first.split()

    if "," in first:
        if len(fields) > 1:
            raise InputFormatError(
                f"{path}: ambiguous format, line 1 mixes commas and whitespace; pass --format"
            )
        return "csv"

    if len(fields) == 2 and all(f.isdigit() for f in fields):
        if len(head) < 2:
            return "word2vec"
        second = head[1].split()
        word2vec_shape = len(second) == int(fields[1]) + 1
        glove_shape = len(second) == len(fields)
        if word2vec_shape and glove_shape:
            raise InputFormatError(
                f"{path}: ambiguous format, line 1 reads as a word2vec header and as a "
                "GloVe row; pass --format"
            )
        return "glove" if glove_shape else "word2vec"

    if len(fields) >= 2:
        return "glove"
    return "csv"


def load_embeddings(path: PathLike, fmt: str = "auto") -> EmbeddingMatrix:
    """Load an embedding matrix in a declared or detected format

    Args:
        path: File to read
        fmt: word2vec, glove, npy, csv or auto

    Returns:
        EmbeddingMatrix ready for estimation
    """
    path = Path(path)
    if not path.is_file():
        raise InputFormatError(f"{path}: no such file")
    if fmt == "auto":
        fmt = detect_format(path)
        logger.info(f"Detected format '{fmt}' for {path.name}")
    if fmt not in LOADERS:
        raise InputFormatError(f"unknown format '{fmt}', expected one of {sorted(LOADERS)}")
    return LOADERS[fmt](path)
