"""On-disk layout for ranking runs, fused rankings, and manifests.

One citing paper produces up to three per-run files named
``<citing_id>.run<k>.json`` (a JSON array of ranked entries) and one
``<citing_id>.fused.json`` with the aggregated ranking.  A run
manifest records seeds and parse bookkeeping; failures append to a
JSONL manifest so partial corpus runs stay inspectable.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Iterator, Sequence

from .aggregate import AggregatedEntry, AggregatedRanking
from .corpus.model import CitingPaperBundle
from .judge.engine import RunFailure
from .judge.parse import RankedEntry, RankingRun
from .labels import ImpactCategory

RUN_FILE_PATTERN = re.compile(r"^(?P<citing>.+)\.run(?P<k>\d+)\.json$")
FUSED_SUFFIX = ".fused.json"
MANIFEST_NAME = "manifest.json"
FAILURES_NAME = "failures.jsonl"


def _dump_json(payload: object) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def run_path(out_dir: Path, citing_id: str, run_index: int) -> Path:
    return Path(out_dir) / f"{citing_id}.run{run_index}.json"


def fused_path(out_dir: Path, citing_id: str) -> Path:
    return Path(out_dir) / f"{citing_id}{FUSED_SUFFIX}"


def write_run_file(out_dir: Path, run: RankingRun) -> Path:
    path = run_path(out_dir, run.citing_id, run.run_index)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dump_json([entry.to_json_dict() for entry in run.entries]))
    return path


def read_run_file(path: Path, bundle: CitingPaperBundle) -> RankingRun:
    """Rebuild a run from its file; bookkeeping fields are re-derived."""
    path = Path(path)
    match = RUN_FILE_PATTERN.match(path.name)
    if not match:
        raise ValueError(f"not a run file name: {path.name}")
    citing_id = match.group("citing")
    if citing_id != bundle.citing.id:
        raise ValueError(
            f"run file {path.name} does not belong to citing paper {bundle.citing.id}"
        )
    rows = json.loads(path.read_text())
    if not isinstance(rows, list):
        raise ValueError(f"{path}: expected a JSON array")
    entries = []
    for row in rows:
        entries.append(
            RankedEntry(
                rank=int(row["rank"]),
                paper_id=row["paperId"],
                title=str(row.get("title") or ""),
                contexts=str(row.get("contexts") or ""),
                reason=str(row.get("reason") or ""),
                category=ImpactCategory.from_string(row["impactCategory"]),
            )
        )
    ranked_ids = {entry.paper_id for entry in entries}
    missing = tuple(
        pid for pid in bundle.reference_ids() if pid not in ranked_ids
    )
    return RankingRun(
        citing_id=citing_id,
        run_index=int(match.group("k")),
        seed=0,
        entries=tuple(entries),
        dropped_hallucinations=(),
        missing=missing,
    )


def list_run_files(out_dir: Path, citing_id: str) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    for path in sorted(out_dir.glob(f"{citing_id}.run*.json")):
        match = RUN_FILE_PATTERN.match(path.name)
        if match and match.group("citing") == citing_id:
            paths.append(path)
    return paths


def read_runs_for_bundle(out_dir: Path, bundle: CitingPaperBundle) -> list[RankingRun]:
    return [
        read_run_file(path, bundle)
        for path in list_run_files(out_dir, bundle.citing.id)
    ]


def write_fused_file(out_dir: Path, fused: AggregatedRanking) -> Path:
    path = fused_path(out_dir, fused.citing_id)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dump_json([entry.to_json_dict() for entry in fused.entries]))
    return path


def read_fused_file(path: Path) -> AggregatedRanking:
    path = Path(path)
    name = path.name
    if not name.endswith(FUSED_SUFFIX):
        raise ValueError(f"not a fused file name: {name}")
    citing_id = name[: -len(FUSED_SUFFIX)]
    rows = json.loads(path.read_text())
    if not isinstance(rows, list):
        raise ValueError(f"{path}: expected a JSON array")
    entries = []
    for row in rows:
        label = row.get("predicted_impact")
        entries.append(
            AggregatedEntry(
                rank=int(row["rank"]),
                paper_id=row["paperId"],
                title=row.get("title", ""),
                rrf_score=float(row["rrf_score"]),
                num_rankings_found=int(row["num_rankings_found"]),
                predicted_impact=(
                    ImpactCategory.from_string(label) if label is not None else None
                ),
            )
        )
    return AggregatedRanking(citing_id=citing_id, entries=tuple(entries), excluded=())


def write_manifest(out_dir: Path, manifest: dict) -> Path:
    path = Path(out_dir) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dump_json(manifest))
    return path


def read_manifest(out_dir: Path) -> dict:
    path = Path(out_dir) / MANIFEST_NAME
    if not path.exists():
        return {}
    return json.loads(path.read_text())


def append_failures(out_dir: Path, failures: Sequence[RunFailure]) -> Path:
    path = Path(out_dir) / FAILURES_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        for failure in failures:
            handle.write(
                json.dumps(
                    {
                        "citing_id": failure.citing_id,
                        "run_index": failure.run_index,
                        "seed": failure.seed,
                        "error": failure.error,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    return path


def read_failures(out_dir: Path) -> list[RunFailure]:
    path = Path(out_dir) / FAILURES_NAME
    if not path.exists():
        return []
    failures = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{lineno}: invalid JSON") from exc
        failures.append(
            RunFailure(
                citing_id=row["citing_id"],
                run_index=int(row["run_index"]),
                seed=int(row["seed"]),
                error=row["error"],
            )
        )
    return failures


def iter_fused_files(out_dir: Path) -> Iterator[Path]:
    yield from sorted(Path(out_dir).glob(f"*{FUSED_SUFFIX}"))
