"""Seeded random generators shared by sampling and synthetic data"""
from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence]


def make_generator(seed: SeedLike) -> np.random.Generator:
    """Philox counter-based generator; normals come from numpy's ziggurat

    The same seed yields the same stream on every platform numpy supports.
    """
    return np.random.Generator(np.random.Philox(seed))


def split_seed(seed: int, streams: int) -> list:
    """Independent child seed sequences derived from one integer seed"""
    return np.random.SeedSequence(seed).spawn(streams)
