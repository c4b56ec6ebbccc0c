"""End-to-end orchestration of fetch, rank, aggregate, train, evaluate.

Thin, deterministic glue over the component modules: reads bundles,
drives the judging engine per citing paper, and writes run/fused/report
files through the storage layer.  Every function is idempotent given
the same inputs; output bytes carry no timestamps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .aggregate import AggregatedRanking, apply_majority_labels, rrf_fuse
from .config import RunConfig
from .corpus.cache import ResponseCache
from .corpus.client import (
    EmptyReferenceListError,
    NotFoundError,
    ScholarClient,
)
from .corpus.ground_truth import GroundTruthLoad, load_ground_truth
from .corpus.model import (
    CitingPaperBundle,
    read_bundles_jsonl,
    write_bundles_jsonl,
)
from .evaluation import (
    EvalReport,
    metrics,
    missing_reference_curve,
    random_baseline,
    render_confusion,
    render_report_table,
)
from .judge.engine import PscError, derive_run_seeds, run_psc
from .judge.prompt import PromptTooLongError
from .judge.engine import RunFailure
from .judge.providers import ProviderAdapter, make_provider
from .labels import BinaryLabel, binarize
from .ordreg import OrdinalModel, annotate_fused, build_training_set, fit, rank_slots
from . import storage

ID_HEX_LENGTH = 40


class EvaluationMismatchError(Exception):
    """Ground-truth pairs that no fused ranking covers."""

    def __init__(self, pairs: list[tuple[str, str]]):
        self.pairs = pairs
        shown = ", ".join(f"{c}->{r}" for c, r in pairs[:20])
        suffix = "" if len(pairs) <= 20 else f" (+{len(pairs) - 20} more)"
        super().__init__(
            f"{len(pairs)} ground-truth pair(s) missing from fused outputs: "
            f"{shown}{suffix}"
        )


def build_provider(config: RunConfig) -> ProviderAdapter:
    """Provider per config; the mock's hidden scores follow the master seed."""
    return make_provider(
        config.judge,
        score_seed=config.master_seed,
        drop_rate=config.mock_rates.drop_rate,
        duplicate_rate=config.mock_rates.duplicate_rate,
        hallucination_rate=config.mock_rates.hallucination_rate,
    )


@dataclass
class FetchOutcome:
    target_id: str
    citing_found: int
    bundles_written: int
    skipped_empty: int


def fetch_corpus(config: RunConfig, target: str, client: ScholarClient) -> FetchOutcome:
    """Resolve the target, pull citers and their references, write bundles."""
    target = target.strip()
    if len(target) == ID_HEX_LENGTH and all(c in "0123456789abcdef" for c in target):
        target_id = target
    else:
        resolved = client.resolve_paper_by_title(target)
        if resolved is None:
            raise NotFoundError(f"no paper found matching {target!r}")
        target_id = resolved

    citers = client.fetch_citing_papers(target_id)
    bundles: list[CitingPaperBundle] = []
    skipped = 0
    for citer in citers:
        try:
            bundles.append(client.fetch_references_with_contexts(citer.id))
        except EmptyReferenceListError:
            skipped += 1
    config.bundles.parent.mkdir(parents=True, exist_ok=True)
    write_bundles_jsonl(config.bundles, bundles)
    return FetchOutcome(
        target_id=target_id,
        citing_found=len(citers),
        bundles_written=len(bundles),
        skipped_empty=skipped,
    )


@dataclass
class RankOutcome:
    papers: int
    files_written: int
    failures: int


def rank_corpus(
    config: RunConfig, provider: ProviderAdapter | None = None
) -> RankOutcome:
    """Three judging runs per bundle; writes run files plus manifests."""
    bundles = read_bundles_jsonl(config.bundles)
    if provider is None:
        provider = build_provider(config)
    seeds = derive_run_seeds(config.master_seed)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    files_written = 0
    failures: list[RunFailure] = []
    paper_entries: dict[str, dict] = {}
    for bundle in bundles:
        try:
            result = run_psc(bundle, provider, config.judge, seeds=seeds)
        except PscError as exc:
            failures.extend(exc.failures)
            continue
        except PromptTooLongError as exc:
            failures.append(
                RunFailure(
                    citing_id=bundle.citing.id,
                    run_index=0,
                    seed=0,
                    error=str(exc),
                )
            )
            continue
        failures.extend(result.failures)
        run_rows = []
        for run in result.runs:
            storage.write_run_file(out_dir, run)
            files_written += 1
            run_rows.append(
                {
                    "run_index": run.run_index,
                    "seed": run.seed,
                    "entries": len(run.entries),
                    "dropped_hallucinations": list(run.dropped_hallucinations),
                    "missing_count": len(run.missing),
                }
            )
        paper_entries[bundle.citing.id] = {"runs": run_rows}

    storage.write_manifest(
        out_dir,
        {
            "master_seed": config.master_seed,
            "run_seeds": list(seeds),
            "provider": config.judge.provider,
            "model": config.judge.model,
            "papers": paper_entries,
        },
    )
    if failures:
        storage.append_failures(out_dir, failures)
    return RankOutcome(
        papers=len(bundles), files_written=files_written, failures=len(failures)
    )


@dataclass
class AggregateOutcome:
    fused_written: int
    skipped_no_runs: int


def aggregate_corpus(
    config: RunConfig, model: OrdinalModel | None = None
) -> AggregateOutcome:
    """Fuse each paper's runs and label entries per the configured mode."""
    bundles = read_bundles_jsonl(config.bundles)
    out_dir = Path(config.out_dir)
    if config.mode == "ordreg" and model is None:
        model_path = Path(config.model_path)
        if not model_path.exists():
            raise FileNotFoundError(
                f"aggregation mode 'ordreg' needs a trained model at {model_path}; "
                "run the train subcommand first or pass --model-path"
            )
        model = OrdinalModel.load(model_path)

    written = 0
    skipped = 0
    for bundle in bundles:
        runs = storage.read_runs_for_bundle(out_dir, bundle)
        if not runs:
            skipped += 1
            continue
        fused = rrf_fuse(runs, bundle, k=config.rrf_k)
        if config.mode == "majority":
            fused = apply_majority_labels(fused, runs)
        else:
            ranks = {
                entry.paper_id: rank_slots(runs, entry.paper_id)
                for entry in fused.entries
            }
            fused = annotate_fused(fused, model, ranks, len(bundle.references))
        storage.write_fused_file(out_dir, fused)
        written += 1
    return AggregateOutcome(fused_written=written, skipped_no_runs=skipped)


def _load_ground_truth(config: RunConfig, bundles: list[CitingPaperBundle]) -> GroundTruthLoad:
    if config.ground_truth is None:
        raise ValueError("no ground-truth path configured (set ground_truth)")
    by_id = {bundle.citing.id: bundle for bundle in bundles}
    return load_ground_truth(config.ground_truth, by_id.get)


@dataclass
class TrainOutcome:
    model: OrdinalModel
    model_path: Path
    rows: int
    excluded_pairs: int


def train_corpus(
    config: RunConfig,
    alpha: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 1000,
) -> TrainOutcome:
    """Fit the ordinal model on pooled ranks, excluding evaluation pairs."""
    bundles = read_bundles_jsonl(config.bundles)
    out_dir = Path(config.out_dir)
    held_out: set[tuple[str, str]] = set()
    if config.ground_truth is not None:
        load = _load_ground_truth(config, bundles)
        held_out = {record.pair() for record in load.records}

    per_paper = []
    for bundle in bundles:
        runs = storage.read_runs_for_bundle(out_dir, bundle)
        if runs:
            per_paper.append((bundle, runs))
    if not per_paper:
        raise ValueError(f"no run files under {out_dir}; run the rank subcommand first")

    training = build_training_set(per_paper, held_out=held_out)
    model = fit(training, alpha=alpha, tol=tol, max_iter=max_iter)
    model_path = Path(config.model_path)
    model_path.parent.mkdir(parents=True, exist_ok=True)
    model.save(model_path)
    return TrainOutcome(
        model=model,
        model_path=model_path,
        rows=len(training),
        excluded_pairs=len(held_out),
    )


@dataclass
class EvaluateOutcome:
    report: EvalReport
    baseline: EvalReport
    n: int
    report_json: Path
    report_text: Path


def evaluate_corpus(config: RunConfig) -> EvaluateOutcome:
    """Score fused predictions against binary ground truth."""
    bundles = read_bundles_jsonl(config.bundles)
    out_dir = Path(config.out_dir)
    load = _load_ground_truth(config, bundles)

    fused_cache: dict[str, AggregatedRanking | None] = {}

    def fused_for(citing_id: str) -> AggregatedRanking | None:
        if citing_id not in fused_cache:
            path = storage.fused_path(out_dir, citing_id)
            fused_cache[citing_id] = (
                storage.read_fused_file(path) if path.exists() else None
            )
        return fused_cache[citing_id]

    pred: list[BinaryLabel] = []
    truth: list[BinaryLabel] = []
    unmatched: list[tuple[str, str]] = []
    for record in load.records:
        fused = fused_for(record.citing_id)
        entry = None
        if fused is not None:
            try:
                entry = fused.entry_for(record.cited_id)
            except KeyError:
                entry = None
        if entry is None or entry.predicted_impact is None:
            unmatched.append(record.pair())
            continue
        pred.append(binarize(entry.predicted_impact))
        truth.append(BinaryLabel(record.label))
    if unmatched:
        raise EvaluationMismatchError(unmatched)
    if not truth:
        raise ValueError("ground truth matched no fused outputs")

    report = metrics(pred, truth)
    baseline = random_baseline(truth, seed=config.master_seed)
    rows = {"random": baseline, "model": report}

    report_json = out_dir / "report.json"
    report_text = out_dir / "report.txt"
    payload = {
        "mode": config.mode,
        "n": report.n,
        "systems": {name: rep.to_json_dict() for name, rep in rows.items()},
        "ingestion": load.report.summary(),
    }
    report_json.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    text = render_report_table(rows) + "\n\nmodel confusion (rows actual):\n"
    text += render_confusion(report) + "\n"
    report_text.write_text(text)
    return EvaluateOutcome(
        report=report,
        baseline=baseline,
        n=report.n,
        report_json=report_json,
        report_text=report_text,
    )


@dataclass
class MissingCurveOutcome:
    curve: list[tuple[int, float]]
    curve_json: Path


def analyze_missing(config: RunConfig, bin_width: int = 20) -> MissingCurveOutcome:
    """Missing-reference curve over the ranked corpus."""
    bundles = read_bundles_jsonl(config.bundles)
    out_dir = Path(config.out_dir)
    per_paper = []
    for bundle in bundles:
        runs = storage.read_runs_for_bundle(out_dir, bundle)
        if runs:
            per_paper.append((bundle, runs))
    curve = missing_reference_curve(per_paper, bin_width=bin_width)
    curve_json = out_dir / "missing_curve.json"
    curve_json.parent.mkdir(parents=True, exist_ok=True)
    payload = [
        {"bin_start": start, "bin_width": bin_width, "mean_missing": mean}
        for start, mean in curve
    ]
    curve_json.write_text(json.dumps(payload, indent=2) + "\n")
    return MissingCurveOutcome(curve=curve, curve_json=curve_json)
