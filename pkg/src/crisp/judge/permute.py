"""Seeded reference-order randomization.

Each judging run sees the reference list in a different uniformly random
order; the seed is recorded so any run can be replayed exactly.
"""

from __future__ import annotations

import random

from ..corpus.model import CitingPaperBundle


def permute_references(bundle: CitingPaperBundle, seed: int) -> list[str]:
    """Uniform Fisher-Yates shuffle of the bundle's reference ids.

    Deterministic for a given (bundle, seed): the generator is seeded
    locally, so surrounding code cannot perturb the order.
    """
    ids = list(bundle.reference_ids())
    rng = random.Random(seed)
    for i in range(len(ids) - 1, 0, -1):
        j = rng.randrange(i + 1)
        ids[i], ids[j] = ids[j], ids[i]
    return ids
