"""Shared fixtures: synthetic corpora and resolved pipeline configs."""

from __future__ import annotations

import hashlib
from pathlib import Path

import pytest

from crisp.config import MockRates, RunConfig
from crisp.corpus.ground_truth import write_ground_truth_jsonl
from crisp.corpus.model import (
    CitingPaperBundle,
    GroundTruthRecord,
    PaperRecord,
    ReferenceEntry,
    write_bundles_jsonl,
)
from crisp.judge.config import JudgeConfig
from crisp.judge.mock import planted_categories
from crisp.labels import binarize


def hex_id(label: str) -> str:
    """Stable 40-hex identifier for synthetic papers."""
    return hashlib.sha256(label.encode("utf-8")).hexdigest()[:40]


def make_bundle(index: int, n_refs: int, contexts_per_ref: int = 2) -> CitingPaperBundle:
    citing = PaperRecord(
        id=hex_id(f"citing-{index}"),
        title=f"Synthetic citing paper {index}",
        abstract=f"Synthetic abstract {index}.",
    )
    references = tuple(
        ReferenceEntry(
            cited=PaperRecord(
                id=hex_id(f"ref-{index}-{j}"),
                title=f"Synthetic reference {index}.{j}",
            ),
            contexts=tuple(
                f"Building on reference {index}.{j} (variant {c})."
                for c in range(contexts_per_ref)
            ),
        )
        for j in range(n_refs)
    )
    return CitingPaperBundle(citing=citing, references=references)


def make_corpus(n_bundles: int, refs_for=None) -> list[CitingPaperBundle]:
    if refs_for is None:
        refs_for = lambda i: 6 + i % 5
    return [make_bundle(i, refs_for(i)) for i in range(n_bundles)]


def planted_ground_truth(
    bundles: list[CitingPaperBundle], score_seed: int
) -> list[GroundTruthRecord]:
    """Binary ground truth matching the mock judge's hidden categories."""
    records = []
    for bundle in bundles:
        for pid, category in planted_categories(bundle, score_seed).items():
            records.append(
                GroundTruthRecord(
                    citing_id=bundle.citing.id,
                    cited_id=pid,
                    label=int(binarize(category)),
                )
            )
    return records


@pytest.fixture
def corpus_factory(tmp_path: Path):
    """Build a ready-to-run synthetic corpus and its RunConfig."""

    def build(
        n_bundles: int = 10,
        refs_for=None,
        master_seed: int = 7,
        mode: str = "majority",
        rates: MockRates | None = None,
        with_ground_truth: bool = True,
        gt_bundles: slice | None = None,
        subdir: str = "corpus",
    ) -> tuple[RunConfig, list[CitingPaperBundle]]:
        # gt_bundles restricts ground truth to a subset so the remaining
        # pairs stay available as training data (training excludes every
        # ground-truth pair to avoid leakage).
        root = tmp_path / subdir
        root.mkdir(parents=True, exist_ok=True)
        bundles = make_corpus(n_bundles, refs_for)
        write_bundles_jsonl(root / "bundles.jsonl", bundles)
        ground_truth = None
        if with_ground_truth:
            covered = bundles if gt_bundles is None else bundles[gt_bundles]
            ground_truth = root / "gt.jsonl"
            write_ground_truth_jsonl(
                ground_truth, planted_ground_truth(covered, master_seed)
            )
        config = RunConfig(
            judge=JudgeConfig(),
            master_seed=master_seed,
            cache_dir=root / "cache",
            bundles=root / "bundles.jsonl",
            ground_truth=ground_truth,
            mode=mode,
            out_dir=root / "out",
            model_path=root / "out" / "model.json",
            mock_rates=rates or MockRates(),
        )
        return config, bundles

    return build
