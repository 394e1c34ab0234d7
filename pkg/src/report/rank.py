"""Low-rank adaptation rank choice from a global ID

Ranks below the ID degrade fine-tuning quality, so the suggestion never
goes below it; the probe set brackets it for a small sweep.
"""
import math

from src.errors import PreconditionError
from src.models.schemas import RankSuggestion


def rank_suggestion(global_id: float) -> RankSuggestion:
    """Recommended minimum rank ceil(ID) and a sweep around it

    Probes are ceil(ID) - 1, ceil(ID), ceil(ID) + 1 and the next power of
    two above ceil(ID); ranks below 1 are dropped.
    """
    if not global_id > 0:
        raise PreconditionError(f"ID must be positive, got {global_id}")
    rank = math.ceil(global_id)
    next_power = 1 << rank.bit_length()
    probes = sorted({p for p in (rank - 1, rank, rank + 1, next_power) if p >= 1})
    return RankSuggestion(id=global_id, recommended=rank, probes=probes)
