"""HTTP API for the reference-ranking annotation workflow.

Each citing-paper bundle becomes one task.  Tasks serve their
references in a seeded-shuffled order (the seed is recorded in the
payload) so the on-screen order can't leak the model's opinion.  A
submission must be a bijection over the task's references with a
category per entry; violations come back as 422 with the offending
ids.  Agreement compares the submission against the fused model
ranking with Spearman's rho.

State is an append-only JSONL journal per task, replayed on startup,
so a crash never loses a submission.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .aggregate import AggregatedRanking
from .corpus.model import CitingPaperBundle, read_bundles_jsonl
from .labels import ImpactCategory
from . import storage

IMPACT_DEFINITIONS = {
    "High": (
        "The citing paper is built directly on this work: its problem "
        "setting, core method, main baseline, or experimental protocol "
        "derives from it."
    ),
    "Medium": (
        "The work supplies important context, motivation, or framing, "
        "but is replaceable by other references without changing the "
        "citing paper."
    ),
    "Low": (
        "The citation is incidental or implementation-level: a standard "
        "dataset, tool, or background mention."
    ),
}


class RankingItem(BaseModel):
    paperId: str
    category: str


class RankingSubmission(BaseModel):
    ranking: list[RankingItem]


def _shuffle_seed(task_id: str, master_seed: int) -> int:
    digest = hashlib.sha256(f"annotation|{task_id}|{master_seed}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


@dataclass
class AnnotationTask:
    bundle: CitingPaperBundle
    shuffle_seed: int
    submitted_ranking: list[dict] | None = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def task_id(self) -> str:
        return self.bundle.citing.id

    @property
    def status(self) -> str:
        return "submitted" if self.submitted_ranking is not None else "open"

    def shuffled_references(self) -> list:
        refs = list(self.bundle.references)
        random.Random(self.shuffle_seed).shuffle(refs)
        return refs


class AnnotationService:
    """Task registry plus journal-backed submission state."""

    def __init__(
        self,
        bundles_path: Path,
        out_dir: Path,
        master_seed: int = 0,
    ):
        self.out_dir = Path(out_dir)
        self.journal_dir = self.out_dir / "annotations"
        self.tasks: dict[str, AnnotationTask] = {}
        for bundle in read_bundles_jsonl(bundles_path):
            task = AnnotationTask(
                bundle=bundle,
                shuffle_seed=_shuffle_seed(bundle.citing.id, master_seed),
            )
            self.tasks[task.task_id] = task
        self._replay_journals()

    def _journal_path(self, task_id: str) -> Path:
        return self.journal_dir / f"{task_id}.jsonl"

    def _replay_journals(self) -> None:
        if not self.journal_dir.exists():
            return
        for task in self.tasks.values():
            path = self._journal_path(task.task_id)
            if not path.exists():
                continue
            for line in path.read_text().splitlines():
                if not line.strip():
                    continue
                event = json.loads(line)
                if event.get("event") == "submit":
                    task.submitted_ranking = event["ranking"]

    def record_submission(self, task: AnnotationTask, ranking: list[dict]) -> None:
        self.journal_dir.mkdir(parents=True, exist_ok=True)
        with self._journal_path(task.task_id).open("a", encoding="utf-8") as handle:
            handle.write(
                json.dumps({"event": "submit", "ranking": ranking}, ensure_ascii=False)
                + "\n"
            )
        task.submitted_ranking = ranking

    def model_ranking(self, task_id: str) -> AggregatedRanking | None:
        path = storage.fused_path(self.out_dir, task_id)
        if not path.exists():
            return None
        return storage.read_fused_file(path)


def validate_submission(
    task: AnnotationTask, items: list[RankingItem]
) -> dict[str, list[str]]:
    """Bijection and category check; a clean submission returns no issues."""
    expected = task.bundle.reference_id_set()
    seen: set[str] = set()
    duplicates: list[str] = []
    unknown: list[str] = []
    bad_category: list[str] = []
    for item in items:
        if item.paperId in seen:
            duplicates.append(item.paperId)
        seen.add(item.paperId)
        if item.paperId not in expected:
            unknown.append(item.paperId)
        try:
            ImpactCategory.from_string(item.category)
        except ValueError:
            bad_category.append(item.paperId)
    missing = sorted(expected - seen)
    issues = {
        "missing": missing,
        "duplicates": sorted(set(duplicates)),
        "unknown": sorted(set(unknown)),
        "invalid_category": sorted(set(bad_category)),
    }
    return {key: value for key, value in issues.items() if value}


def _spearman_against_model(
    submission: list[dict], model_ranking: AggregatedRanking
) -> tuple[float, int]:
    from .evaluation import spearman

    submitted_order = [item["paperId"] for item in submission]
    model_order = [entry.paper_id for entry in model_ranking.entries]
    common = set(submitted_order) & set(model_order)
    a = {pid: pos for pos, pid in enumerate(submitted_order, 1) if pid in common}
    b = {pid: pos for pos, pid in enumerate(model_order, 1) if pid in common}
    return spearman(a, b), len(common)


def create_app(
    bundles_path: Path,
    out_dir: Path,
    master_seed: int = 0,
    static_dir: Path | None = None,
) -> FastAPI:
    service = AnnotationService(bundles_path, out_dir, master_seed=master_seed)
    app = FastAPI(title="reference-ranking annotation API")
    app.state.service = service

    @app.get("/tasks")
    def list_tasks():
        return [
            {
                "task_id": task.task_id,
                "citing_title": task.bundle.citing.title,
                "n_references": len(task.bundle.references),
                "status": task.status,
            }
            for task in service.tasks.values()
        ]

    def _get_task(task_id: str) -> AnnotationTask | None:
        return service.tasks.get(task_id)

    @app.get("/tasks/{task_id}")
    def get_task(task_id: str):
        task = _get_task(task_id)
        if task is None:
            return JSONResponse(status_code=404, content={"detail": "unknown task"})
        return {
            "task_id": task.task_id,
            "citing": {
                "id": task.bundle.citing.id,
                "title": task.bundle.citing.title,
                "abstract": task.bundle.citing.abstract,
            },
            "status": task.status,
            "shuffle_seed": task.shuffle_seed,
            "impact_definitions": IMPACT_DEFINITIONS,
            "references": [
                {
                    "paperId": ref.cited.id,
                    "title": ref.cited.title,
                    "contexts": list(ref.contexts),
                }
                for ref in task.shuffled_references()
            ],
            "submitted_ranking": task.submitted_ranking,
        }

    @app.post("/tasks/{task_id}/ranking")
    def submit_ranking(task_id: str, submission: RankingSubmission):
        task = _get_task(task_id)
        if task is None:
            return JSONResponse(status_code=404, content={"detail": "unknown task"})
        with task.lock:
            if task.submitted_ranking is not None:
                return JSONResponse(
                    status_code=409, content={"detail": "task already submitted"}
                )
            issues = validate_submission(task, submission.ranking)
            if issues:
                return JSONResponse(
                    status_code=422,
                    content={
                        "detail": "submission is not a categorized bijection "
                        "over the task's references",
                        **issues,
                    },
                )
            ranking = [
                {
                    "paperId": item.paperId,
                    "category": ImpactCategory.from_string(item.category).to_string(),
                }
                for item in submission.ranking
            ]
            service.record_submission(task, ranking)
        return {"task_id": task_id, "status": task.status, "n": len(ranking)}

    @app.get("/tasks/{task_id}/agreement")
    def agreement(task_id: str):
        task = _get_task(task_id)
        if task is None:
            return JSONResponse(status_code=404, content={"detail": "unknown task"})
        if task.submitted_ranking is None:
            return JSONResponse(
                status_code=409, content={"detail": "no submission for this task yet"}
            )
        model_ranking = service.model_ranking(task_id)
        if model_ranking is None:
            return JSONResponse(
                status_code=409,
                content={"detail": "no fused model ranking for this task"},
            )
        try:
            rho, n = _spearman_against_model(task.submitted_ranking, model_ranking)
        except ValueError as exc:
            return JSONResponse(status_code=409, content={"detail": str(exc)})
        return {"task_id": task_id, "spearman": rho, "n": n}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def default_static_dir() -> Path | None:
    """Built UI assets, when the companion frontend has been built."""
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None
