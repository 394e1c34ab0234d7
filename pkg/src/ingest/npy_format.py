"""Reader and writer for npy v1.0 embedding files"""
import logging
from pathlib import Path
from typing import Union

import numpy as np
from numpy.lib import format as npformat

from src.errors import InputFormatError
from src.models.schemas import EmbeddingMatrix

logger = logging.getLogger(__name__)

NPY_MAGIC = b"\x93NUMPY"
SUPPORTED_VERSION = b"\x01\x00"
SUPPORTED_DTYPES = ("<f4", "<f8")


def load_npy(path: Union[str, Path]) -> EmbeddingMatrix:
    """Load a 2-D float32/float64 C-order npy v1.0 file

    Args:
        path: File to read

    Returns:
        EmbeddingMatrix without labels, values widened to float64
    """
    path = Path(path)
    with open(path, "rb") as f:
        prefix = f.read(len(NPY_MAGIC))
        if prefix != NPY_MAGIC:
            raise InputFormatError(f"{path}: bad magic {prefix!r}, not an npy file")

        version = f.read(2)
        if version != SUPPORTED_VERSION:
            raise InputFormatError(
                f"{path}: unsupported npy version {tuple(version)}, only 1.0 is read"
            )

        try:
            shape, fortran_order, dtype = npformat.read_array_header_1_0(f)
        except ValueError as e:
            raise InputFormatError(f"{path}: malformed npy header ({e})") from e

        payload = f.read()

    if dtype.str not in SUPPORTED_DTYPES:
        raise InputFormatError(
            f"{path}: unsupported dtype {dtype.str}, expected one of {SUPPORTED_DTYPES}"
        )
    if fortran_order:
        raise InputFormatError(f"{path}: unsupported layout fortran_order=True, expected C order")
    if len(shape) != 2:
        raise InputFormatError(f"{path}: expected 2-D shape (n, d), got {shape}")

    n, d = shape
    if n == 0 or d == 0:
        raise InputFormatError(f"{path}: empty matrix of shape {shape}")

    expected = n * d * dtype.itemsize
    if len(payload) < expected:
        raise InputFormatError(
            f"{path}: truncated payload, expected {expected} bytes, got {len(payload)}"
        )
    if len(payload) > expected:
        raise InputFormatError(
            f"{path}: {len(payload) - expected} trailing bytes after the {expected}-byte payload"
        )

    values = np.frombuffer(payload, dtype=dtype).reshape(n, d)
    finite_rows = np.isfinite(values).all(axis=1)
    if not finite_rows.all():
        row = int(np.flatnonzero(~finite_rows)[0]) + 1
        raise InputFormatError(f"{path}: non-finite value at row {row}")

    logger.info(f"✓ Loaded npy matrix {n}x{d} ({dtype.str}) from {path.name}")
    return EmbeddingMatrix(
        data=values,
        source=f"{path} (npy)",
        storage_dtype=dtype.str,
    )


def write_npy(matrix: EmbeddingMatrix, path: Union[str, Path]) -> Path:
    """Write ``matrix`` as npy v1.0 in its storage precision

    Args:
        matrix: Matrix to write
        path: Destination file

    Returns:
        The written path
    """
    path = Path(path)
    values = matrix.data.astype(np.dtype(matrix.storage_dtype))
    with open(path, "wb") as f:
        npformat.write_array(f, values, version=(1, 0), allow_pickle=False)
    return path
