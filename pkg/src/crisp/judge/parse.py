"""Validation and parsing of judge completions.

A completion is expected to contain a JSON array of ranked-entry
objects (field names per the run-file format: "rank", "paperId",
"title", "contexts", "reason", "impactCategory").  Models often wrap
the array in prose, so extraction scans for the first parseable
top-level array.  Entries naming papers outside the bundle are dropped
as hallucinations; a paper ranked twice keeps its best (lowest) rank.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..corpus.model import CitingPaperBundle
from ..labels import ImpactCategory


class ParseError(Exception):
    """Completion could not be parsed; carries the raw text for triage."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


@dataclass(frozen=True)
class RankedEntry:
    """One reference as ranked by a single run."""

    rank: int
    paper_id: str
    title: str
    contexts: str
    reason: str
    category: ImpactCategory

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")

    def to_json_dict(self) -> dict:
        return {
            "rank": self.rank,
            "paperId": self.paper_id,
            "title": self.title,
            "contexts": self.contexts,
            "reason": self.reason,
            "impactCategory": self.category.to_string(),
        }


@dataclass(frozen=True)
class RankingRun:
    """One parsed judging run over a citing paper's references."""

    citing_id: str
    run_index: int
    seed: int
    entries: tuple[RankedEntry, ...]
    dropped_hallucinations: tuple[str, ...] = ()
    missing: tuple[str, ...] = ()

    def rank_of(self, paper_id: str) -> int | None:
        for entry in self.entries:
            if entry.paper_id == paper_id:
                return entry.rank
        return None

    def categories(self) -> dict[str, ImpactCategory]:
        return {entry.paper_id: entry.category for entry in self.entries}


def extract_first_json_array(raw: str) -> list:
    """First top-level JSON array in ``raw``, tolerating surrounding prose."""
    decoder = json.JSONDecoder()
    index = raw.find("[")
    while index != -1:
        try:
            value, _ = decoder.raw_decode(raw, index)
        except json.JSONDecodeError:
            index = raw.find("[", index + 1)
            continue
        if isinstance(value, list):
            return value
        index = raw.find("[", index + 1)
    raise ParseError("no JSON array found in completion", raw=raw)


def _parse_entry(obj, raw: str) -> RankedEntry:
    if not isinstance(obj, dict):
        raise ParseError(f"ranked entry is not an object: {obj!r}", raw=raw)
    rank = obj.get("rank")
    if isinstance(rank, bool) or not isinstance(rank, (int, float)):
        raise ParseError(f"entry rank missing or non-numeric: {obj!r}", raw=raw)
    if isinstance(rank, float):
        if not rank.is_integer():
            raise ParseError(f"entry rank is not an integer: {rank!r}", raw=raw)
        rank = int(rank)
    if rank < 1:
        raise ParseError(f"entry rank must be >= 1: {rank}", raw=raw)
    paper_id = obj.get("paperId")
    if not isinstance(paper_id, str) or not paper_id.strip():
        raise ParseError(f"entry paperId missing: {obj!r}", raw=raw)
    category_raw = obj.get("impactCategory")
    if not isinstance(category_raw, str):
        raise ParseError(f"entry impactCategory missing: {obj!r}", raw=raw)
    try:
        category = ImpactCategory.from_string(category_raw)
    except ValueError as exc:
        raise ParseError(str(exc), raw=raw) from exc
    return RankedEntry(
        rank=rank,
        paper_id=paper_id,
        title=str(obj.get("title") or ""),
        contexts=str(obj.get("contexts") or ""),
        reason=str(obj.get("reason") or ""),
        category=category,
    )


def parse_ranking_response(
    raw: str,
    bundle: CitingPaperBundle,
    run_index: int = 1,
    seed: int = 0,
) -> RankingRun:
    """Parse one completion into a validated RankingRun.

    Hallucinated ids are recorded and dropped; duplicates keep the best
    rank; bundle references absent from the output land in ``missing``.
    """
    array = extract_first_json_array(raw)
    parsed = [_parse_entry(obj, raw) for obj in array]

    known_ids = bundle.reference_id_set()
    hallucinations: list[str] = []
    best: dict[str, RankedEntry] = {}
    for entry in parsed:
        if entry.paper_id not in known_ids:
            hallucinations.append(entry.paper_id or entry.title)
            continue
        kept = best.get(entry.paper_id)
        if kept is None or entry.rank < kept.rank:
            best[entry.paper_id] = entry

    entries = tuple(sorted(best.values(), key=lambda e: (e.rank, e.paper_id)))
    missing = tuple(pid for pid in bundle.reference_ids() if pid not in best)
    return RankingRun(
        citing_id=bundle.citing.id,
        run_index=run_index,
        seed=seed,
        entries=entries,
        dropped_hallucinations=tuple(hallucinations),
        missing=missing,
    )
