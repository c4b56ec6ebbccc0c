"""Citation-graph data model.

Papers are identified by the opaque hex identifiers issued by the
scholarly-graph API.  A ``CitingPaperBundle`` is the unit the rest of
the pipeline operates on: one citing paper together with its full
reference list and the citation contexts attached to each reference.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable


def _require_paper_id(value: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise ValueError("paper id must be a non-empty string")
    return value


@dataclass(frozen=True)
class PaperRecord:
    """Identity plus minimal metadata for a node in the citation graph."""

    id: str
    title: str = ""
    abstract: str | None = None

    def __post_init__(self) -> None:
        _require_paper_id(self.id)


@dataclass(frozen=True)
class ReferenceEntry:
    """One outgoing citation edge: the cited paper and its contexts.

    ``contexts`` holds the excerpts of the citing paper's text around
    each in-text citation, in API order.  It may be empty; the API
    returns some references without contexts.
    """

    cited: PaperRecord
    contexts: tuple[str, ...] = ()


@dataclass(frozen=True)
class CitingPaperBundle:
    """A citing paper with its complete, de-duplicated reference list."""

    citing: PaperRecord
    references: tuple[ReferenceEntry, ...]

    def __post_init__(self) -> None:
        if not self.references:
            raise ValueError(f"bundle for {self.citing.id} has no references")
        seen: set[str] = set()
        for ref in self.references:
            if ref.cited.id in seen:
                raise ValueError(
                    f"duplicate reference {ref.cited.id} in bundle {self.citing.id}"
                )
            seen.add(ref.cited.id)

    def reference_ids(self) -> tuple[str, ...]:
        return tuple(ref.cited.id for ref in self.references)

    def reference_id_set(self) -> frozenset[str]:
        return frozenset(ref.cited.id for ref in self.references)

    def reference_by_id(self, paper_id: str) -> ReferenceEntry:
        for ref in self.references:
            if ref.cited.id == paper_id:
                return ref
        raise KeyError(paper_id)

    def to_json_dict(self) -> dict:
        return {
            "citing": {
                "id": self.citing.id,
                "title": self.citing.title,
                "abstract": self.citing.abstract,
            },
            "references": [
                {
                    "cited": {"id": r.cited.id, "title": r.cited.title},
                    "contexts": list(r.contexts),
                }
                for r in self.references
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CitingPaperBundle":
        citing = PaperRecord(
            id=doc["citing"]["id"],
            title=doc["citing"].get("title", "") or "",
            abstract=doc["citing"].get("abstract"),
        )
        refs = tuple(
            ReferenceEntry(
                cited=PaperRecord(
                    id=r["cited"]["id"], title=r["cited"].get("title", "") or ""
                ),
                contexts=tuple(r.get("contexts", [])),
            )
            for r in doc["references"]
        )
        return cls(citing=citing, references=refs)


@dataclass(frozen=True)
class GroundTruthRecord:
    """One human-labeled citation edge from the released dataset."""

    citing_id: str
    cited_id: str
    label: int  # BinaryLabel value

    def pair(self) -> tuple[str, str]:
        return (self.citing_id, self.cited_id)


def dedupe_references(entries: Iterable[ReferenceEntry]) -> tuple[ReferenceEntry, ...]:
    """Drop repeated cited ids, keeping the first occurrence (idempotent)."""
    seen: set[str] = set()
    out: list[ReferenceEntry] = []
    for entry in entries:
        if entry.cited.id in seen:
            continue
        seen.add(entry.cited.id)
        out.append(entry)
    return tuple(out)


def write_bundles_jsonl(path, bundles: Iterable[CitingPaperBundle]) -> int:
    """Write bundles as JSON lines; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for bundle in bundles:
            fh.write(json.dumps(bundle.to_json_dict(), ensure_ascii=False) + "\n")
            count += 1
    return count


def read_bundles_jsonl(path) -> list[CitingPaperBundle]:
    bundles = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                bundles.append(CitingPaperBundle.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad bundle record: {exc}") from exc
    return bundles
