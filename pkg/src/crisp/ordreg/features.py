"""Rank-derived feature vectors and training-set assembly.

Each (citing, cited) pair ranked in at least one run becomes one row:
the three per-run ranks (median-imputing absent ones), the same ranks
normalized by the citing paper's full reference-list length, their
population standard deviation, and their mean — eight components.
Pairs in the held-out evaluation set are excluded to prevent leakage,
but the normalization length is always the full pre-exclusion list.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import median
from typing import Iterable, Sequence

import numpy as np

from ..aggregate import vote_labels
from ..corpus.model import CitingPaperBundle
from ..judge.parse import RankingRun
from ..labels import ImpactCategory

NUM_FEATURES = 8
NUM_RANK_SLOTS = 3


def build_features(ranks: Sequence[float | None], n_references: int) -> np.ndarray:
    """Feature vector from up to three per-run ranks.

    ``ranks`` holds one optional rank per run slot; missing slots are
    imputed with the median of the available ranks.  ``n_references``
    is the full reference-list length used for normalization.
    """
    if n_references < 1:
        raise ValueError("n_references must be positive")
    if len(ranks) > NUM_RANK_SLOTS:
        raise ValueError(f"at most {NUM_RANK_SLOTS} ranks, got {len(ranks)}")
    present = [float(r) for r in ranks if r is not None]
    if not present:
        raise ValueError("at least one rank must be present")
    if any(r < 1 for r in present):
        raise ValueError(f"ranks must be >= 1, got {present}")

    fill = median(present)
    slots = [float(r) if r is not None else fill for r in ranks]
    slots += [fill] * (NUM_RANK_SLOTS - len(slots))

    arr = np.asarray(slots, dtype=np.float64)
    normalized = arr / n_references
    std = float(np.sqrt(np.mean((arr - arr.mean()) ** 2)))  # population std
    return np.concatenate([arr, normalized, [std, arr.mean()]])


@dataclass
class TrainingSet:
    """Pooled feature matrix with majority-vote labels."""

    X: np.ndarray  # (n, 8)
    y: np.ndarray  # (n,) values in {0, 1, 2}
    pairs: list[tuple[str, str]]
    excluded_pairs: frozenset[tuple[str, str]]

    def __len__(self) -> int:
        return len(self.y)


def rank_slots(runs: Sequence[RankingRun], paper_id: str) -> list[float | None]:
    """Per-run rank of a reference, one slot per executed run plus None
    padding up to three slots."""
    slots: list[float | None] = [
        float(r) if (r := run.rank_of(paper_id)) is not None else None for run in runs
    ]
    slots += [None] * (NUM_RANK_SLOTS - len(slots))
    return slots


def build_training_set(
    per_paper: Iterable[tuple[CitingPaperBundle, Sequence[RankingRun]]],
    held_out: Iterable[tuple[str, str]] = (),
) -> TrainingSet:
    """One global pooled training set across all citing papers.

    Rows are every (citing, cited) pair ranked in at least one run and
    not in ``held_out``; labels come from majority vote over the runs.
    """
    held_out = frozenset(held_out)
    features: list[np.ndarray] = []
    labels: list[int] = []
    pairs: list[tuple[str, str]] = []
    for bundle, runs in per_paper:
        if not runs:
            raise ValueError(f"no runs for citing paper {bundle.citing.id}")
        n_references = len(bundle.references)
        votes = vote_labels(list(runs))
        for ref in bundle.references:
            pid = ref.cited.id
            if pid not in votes:
                continue  # ranked in no run; excluded upstream
            pair = (bundle.citing.id, pid)
            if pair in held_out:
                continue
            features.append(build_features(rank_slots(runs, pid), n_references))
            labels.append(int(votes[pid]))
            pairs.append(pair)

    X = (
        np.vstack(features)
        if features
        else np.empty((0, NUM_FEATURES), dtype=np.float64)
    )
    y = np.asarray(labels, dtype=np.int64)
    return TrainingSet(X=X, y=y, pairs=pairs, excluded_pairs=held_out)
