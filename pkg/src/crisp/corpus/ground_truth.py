"""Ingestion of the human-labeled citation dataset.

Accepts JSON-lines or delimited (csv/tsv) input with fields
``citing_id``, ``cited_id``, ``context_text``, ``label``.  Filtering
mirrors the experimental protocol: repeated annotations of the same
citation context are dropped (exact match on the trimmed text),
duplicate (citing, cited) pairs keep their first occurrence, and citing
papers whose API response has no references are discarded wholesale.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from ..labels import BinaryLabel
from .model import CitingPaperBundle, GroundTruthRecord

REQUIRED_FIELDS = ("citing_id", "cited_id", "label")

# Returns the bundle for a citing id, or None when it must be discarded
# (no references, unknown id).
BundleLookup = Callable[[str], "CitingPaperBundle | None"]


@dataclass
class IngestionReport:
    kept_citing: int = 0
    kept_pairs: int = 0
    dropped_repeated_contexts: int = 0
    dropped_duplicate_pairs: int = 0
    dropped_citing_without_references: int = 0
    dropped_pairs_without_references: int = 0

    def summary(self) -> str:
        return (
            f"kept {self.kept_citing} citing papers, {self.kept_pairs} labeled pairs "
            f"(dropped: {self.dropped_repeated_contexts} repeated contexts, "
            f"{self.dropped_duplicate_pairs} duplicate pairs, "
            f"{self.dropped_citing_without_references} citing papers without references)"
        )


@dataclass
class GroundTruthLoad:
    records: list[GroundTruthRecord]
    bundles: list[CitingPaperBundle]
    report: IngestionReport = field(default_factory=IngestionReport)


def _iter_rows(path: Path) -> Iterable[tuple[int, dict]]:
    suffix = path.suffix.lower()
    if suffix in (".jsonl", ".json", ".ndjson"):
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
                if not isinstance(row, dict):
                    raise ValueError(f"{path}:{lineno}: expected an object per line")
                yield lineno, row
    else:
        delimiter = "\t" if suffix in (".tsv", ".tab") else ","
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh, delimiter=delimiter)
            for lineno, row in enumerate(reader, start=2):  # header is line 1
                yield lineno, row


def _parse_row(path: Path, lineno: int, row: dict) -> tuple[str, str, str, BinaryLabel]:
    for name in REQUIRED_FIELDS:
        value = row.get(name)
        if value is None or not str(value).strip():
            raise ValueError(f"{path}:{lineno}: missing field {name!r}")
    try:
        label = BinaryLabel.from_string(str(row["label"]))
    except ValueError as exc:
        raise ValueError(f"{path}:{lineno}: {exc}") from exc
    context = str(row.get("context_text") or "").strip()
    return str(row["citing_id"]).strip(), str(row["cited_id"]).strip(), context, label


def load_ground_truth(
    path: str | Path, bundle_lookup: BundleLookup
) -> GroundTruthLoad:
    """Parse, filter, and join the labeled dataset with API bundles.

    ``bundle_lookup`` supplies the reference bundle for each citing id
    (normally a cached ScholarClient); returning None discards every
    record of that citing paper.
    """
    path = Path(path)
    report = IngestionReport()

    seen_context_keys: set[tuple[str, str, str]] = set()
    seen_pairs: set[tuple[str, str]] = set()
    by_citing: dict[str, list[GroundTruthRecord]] = {}

    for lineno, row in _iter_rows(path):
        citing_id, cited_id, context, label = _parse_row(path, lineno, row)
        context_key = (citing_id, cited_id, context)
        if context_key in seen_context_keys:
            report.dropped_repeated_contexts += 1
            continue
        seen_context_keys.add(context_key)
        pair = (citing_id, cited_id)
        if pair in seen_pairs:
            report.dropped_duplicate_pairs += 1
            continue
        seen_pairs.add(pair)
        by_citing.setdefault(citing_id, []).append(
            GroundTruthRecord(citing_id=citing_id, cited_id=cited_id, label=int(label))
        )

    records: list[GroundTruthRecord] = []
    bundles: list[CitingPaperBundle] = []
    for citing_id, citing_records in by_citing.items():
        bundle = bundle_lookup(citing_id)
        if bundle is None:
            report.dropped_citing_without_references += 1
            report.dropped_pairs_without_references += len(citing_records)
            continue
        bundles.append(bundle)
        records.extend(citing_records)

    report.kept_citing = len(bundles)
    report.kept_pairs = len(records)
    return GroundTruthLoad(records=records, bundles=bundles, report=report)


def write_ground_truth_jsonl(path: str | Path, records: Iterable[GroundTruthRecord]) -> int:
    """Serialize records back to the ingestion format (contexts omitted)."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(
                json.dumps(
                    {
                        "citing_id": record.citing_id,
                        "cited_id": record.cited_id,
                        "context_text": "",
                        "label": BinaryLabel(record.label).to_string(),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            count += 1
    return count
