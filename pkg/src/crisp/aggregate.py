"""Combining the three runs per citing paper.

Two aggregation surfaces: majority voting over the per-run impact
labels, and Reciprocal Rank Fusion of the three rankings into a single
ordered list.  Fusion always sums three reciprocal terms 1/(k + rank);
a reference missing from some runs has those slots imputed with the
arithmetic mean of the ranks it did receive, and a reference found in
no run is excluded from the fused list entirely.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from statistics import median

from .corpus.model import CitingPaperBundle
from .judge.parse import RankingRun
from .labels import ImpactCategory

RRF_K = 60
NUM_RANKING_SLOTS = 3


@dataclass(frozen=True)
class AggregatedEntry:
    rank: int
    paper_id: str
    title: str
    rrf_score: float
    num_rankings_found: int
    predicted_impact: ImpactCategory | None = None

    def to_json_dict(self) -> dict:
        return {
            "rank": self.rank,
            "paperId": self.paper_id,
            "title": self.title,
            "rrf_score": self.rrf_score,
            "num_rankings_found": self.num_rankings_found,
            "predicted_impact": (
                self.predicted_impact.to_string() if self.predicted_impact is not None else None
            ),
        }


@dataclass(frozen=True)
class AggregatedRanking:
    citing_id: str
    entries: tuple[AggregatedEntry, ...]
    excluded: tuple[str, ...] = ()

    def entry_for(self, paper_id: str) -> AggregatedEntry:
        for entry in self.entries:
            if entry.paper_id == paper_id:
                return entry
        raise KeyError(paper_id)


def majority_vote(labels: list[ImpactCategory]) -> ImpactCategory:
    """Most frequent label across runs.

    Ties fall back to the ordinal median of the multiset: three distinct
    labels give Medium, and a 1-1 tie from a degraded two-run input
    gives the lower category.
    """
    if not labels:
        raise ValueError("majority_vote requires at least one label")
    counts = Counter(labels)
    top_count = max(counts.values())
    leaders = [label for label, count in counts.items() if count == top_count]
    if len(leaders) == 1:
        return leaders[0]
    if len(labels) == 2:
        return min(leaders)
    return ImpactCategory(int(median(sorted(int(label) for label in labels))))


def collect_ranks(runs: list[RankingRun], paper_id: str) -> list[int]:
    """Raw rank of ``paper_id`` in each run where it appears, in run order."""
    ranks = []
    for run in runs:
        rank = run.rank_of(paper_id)
        if rank is not None:
            ranks.append(rank)
    return ranks


def rrf_score(found_ranks: list[float], k: int = RRF_K) -> float:
    """Sum of 1/(k + rank) over three slots, mean-imputing absent ranks.

    Slots are summed in sorted order so the score is bit-identical no
    matter which runs contributed which rank.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if not found_ranks:
        raise ValueError("at least one rank is required")
    if len(found_ranks) > NUM_RANKING_SLOTS:
        raise ValueError(
            f"at most {NUM_RANKING_SLOTS} ranks, got {len(found_ranks)}"
        )
    if any(rank < 1 for rank in found_ranks):
        raise ValueError(f"ranks must be >= 1, got {found_ranks}")
    imputed = sum(found_ranks) / len(found_ranks)
    slots = list(found_ranks) + [imputed] * (NUM_RANKING_SLOTS - len(found_ranks))
    return sum(1.0 / (k + rank) for rank in sorted(slots))


def rrf_fuse(
    runs: list[RankingRun],
    bundle: CitingPaperBundle,
    k: int = RRF_K,
) -> AggregatedRanking:
    """Fuse up to three runs of one citing paper into a single ranking.

    Entries are sorted by score descending, ties broken by paper id so
    output files are deterministic.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if not 1 <= len(runs) <= NUM_RANKING_SLOTS:
        raise ValueError(f"expected 1..{NUM_RANKING_SLOTS} runs, got {len(runs)}")
    for run in runs:
        if run.citing_id != bundle.citing.id:
            raise ValueError(
                f"run for {run.citing_id} does not belong to bundle {bundle.citing.id}"
            )

    scored = []
    excluded = []
    for ref in bundle.references:
        ranks = collect_ranks(runs, ref.cited.id)
        if not ranks:
            excluded.append(ref.cited.id)
            continue
        scored.append(
            (
                ref.cited.id,
                ref.cited.title,
                rrf_score([float(r) for r in ranks], k=k),
                len(ranks),
            )
        )

    scored.sort(key=lambda item: (-item[2], item[0]))
    entries = tuple(
        AggregatedEntry(
            rank=position,
            paper_id=pid,
            title=title,
            rrf_score=score,
            num_rankings_found=found,
        )
        for position, (pid, title, score, found) in enumerate(scored, start=1)
    )
    return AggregatedRanking(
        citing_id=bundle.citing.id, entries=entries, excluded=tuple(excluded)
    )


def vote_labels(runs: list[RankingRun]) -> dict[str, ImpactCategory]:
    """Majority-vote label for every reference ranked in at least one run."""
    labels: dict[str, list[ImpactCategory]] = {}
    for run in runs:
        for entry in run.entries:
            labels.setdefault(entry.paper_id, []).append(entry.category)
    return {pid: majority_vote(votes) for pid, votes in labels.items()}


def apply_majority_labels(
    ranking: AggregatedRanking, runs: list[RankingRun]
) -> AggregatedRanking:
    """Fill predicted_impact on each fused entry by majority vote."""
    votes = vote_labels(runs)
    entries = tuple(
        replace(entry, predicted_impact=votes[entry.paper_id])
        for entry in ranking.entries
    )
    return replace(ranking, entries=entries)


def count_missing(run: RankingRun, bundle: CitingPaperBundle) -> int:
    """How many bundle references the run failed to rank."""
    if run.citing_id != bundle.citing.id:
        raise ValueError(
            f"run for {run.citing_id} does not belong to bundle {bundle.citing.id}"
        )
    return len(bundle.references) - len(run.entries)
