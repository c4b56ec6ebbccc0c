"""Binary classification metrics, baselines, and agreement measures.

Ternary impact labels collapse to a binary space (High is the positive
"impact-revealing" class) before scoring.  Reports carry a confusion
matrix (rows actual, columns predicted, class order: other,
impact-revealing) and the binomial standard error of the accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.stats

from .aggregate import count_missing
from .corpus.model import CitingPaperBundle
from .judge.parse import RankingRun
from .labels import BinaryLabel, ImpactCategory, binarize

__all__ = [
    "EvalReport",
    "f1_from_precision_recall",
    "metrics",
    "random_baseline",
    "missing_reference_curve",
    "spearman",
    "render_report_table",
    "render_confusion",
]


def f1_from_precision_recall(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class EvalReport:
    """Binary classification scores over n citation pairs."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    accuracy_se: float
    n: int
    confusion: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self) -> None:
        total = sum(sum(row) for row in self.confusion)
        if total != self.n:
            raise ValueError(f"confusion entries sum to {total}, expected n={self.n}")

    def to_json_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy_se": self.accuracy_se,
            "n": self.n,
            "confusion": [list(row) for row in self.confusion],
            "confusion_layout": {
                "rows": "actual",
                "columns": "predicted",
                "classes": ["other", "impact-revealing"],
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "EvalReport":
        return cls(
            accuracy=float(data["accuracy"]),
            precision=float(data["precision"]),
            recall=float(data["recall"]),
            f1=float(data["f1"]),
            accuracy_se=float(data["accuracy_se"]),
            n=int(data["n"]),
            confusion=tuple(tuple(int(v) for v in row) for row in data["confusion"]),
        )


def metrics(
    pred: Sequence[BinaryLabel], truth: Sequence[BinaryLabel]
) -> EvalReport:
    """Accuracy, precision/recall/F1 for the impact-revealing class.

    F1 is defined as 0 when precision + recall is 0; the accuracy's
    standard error uses the binomial formula sqrt(acc*(1-acc)/n).
    """
    if len(pred) != len(truth):
        raise ValueError(
            f"prediction/truth length mismatch: {len(pred)} vs {len(truth)}"
        )
    n = len(truth)
    if n < 1:
        raise ValueError("need at least one labeled pair")

    confusion = [[0, 0], [0, 0]]
    for p, t in zip(pred, truth):
        confusion[int(t)][int(p)] += 1

    tp = confusion[1][1]
    fp = confusion[0][1]
    fn = confusion[1][0]
    tn = confusion[0][0]
    accuracy = (tp + tn) / n
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = f1_from_precision_recall(precision, recall)
    accuracy_se = float(np.sqrt(accuracy * (1.0 - accuracy) / n))
    return EvalReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy_se=accuracy_se,
        n=n,
        confusion=(tuple(confusion[0]), tuple(confusion[1])),
    )


def random_baseline(truth: Sequence[BinaryLabel], seed: int) -> EvalReport:
    """Score a coin-flip predictor against the given truth labels."""
    if len(truth) < 1:
        raise ValueError("need at least one labeled pair")
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, 2, size=len(truth))
    pred = [BinaryLabel(int(d)) for d in draws]
    return metrics(pred, truth)


def missing_reference_curve(
    per_paper: Iterable[tuple[CitingPaperBundle, Sequence[RankingRun]]],
    bin_width: int = 20,
) -> list[tuple[int, float]]:
    """Mean missing-reference count bucketed by reference-list size.

    Each citing paper contributes the mean over its runs of the number
    of its references absent from that run; papers are grouped into
    [b, b + bin_width) buckets of reference-list length and the
    per-bucket mean is reported as (bucket start, mean).
    """
    if bin_width < 1:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    buckets: dict[int, list[float]] = {}
    for bundle, runs in per_paper:
        if not runs:
            continue
        per_run = [count_missing(run, bundle) for run in runs]
        mean_missing = sum(per_run) / len(per_run)
        start = (len(bundle.references) // bin_width) * bin_width
        buckets.setdefault(start, []).append(mean_missing)
    return [
        (start, sum(vals) / len(vals)) for start, vals in sorted(buckets.items())
    ]


RankingLike = Sequence[Hashable] | Mapping[Hashable, float]


def _as_rank_map(ranking: RankingLike) -> dict[Hashable, float]:
    if isinstance(ranking, Mapping):
        return {item: float(rank) for item, rank in ranking.items()}
    rank_map: dict[Hashable, float] = {}
    for position, item in enumerate(ranking, start=1):
        if item in rank_map:
            raise ValueError(f"duplicate item in ranking: {item!r}")
        rank_map[item] = float(position)
    return rank_map


def spearman(rank_a: RankingLike, rank_b: RankingLike) -> float:
    """Spearman rank correlation between two rankings of one item set.

    Accepts ordered sequences (position = rank) or item -> rank maps;
    maps may contain ties, which are resolved by average ranks.
    """
    map_a = _as_rank_map(rank_a)
    map_b = _as_rank_map(rank_b)
    if map_a.keys() != map_b.keys():
        only_a = sorted(str(i) for i in map_a.keys() - map_b.keys())
        only_b = sorted(str(i) for i in map_b.keys() - map_a.keys())
        raise ValueError(
            f"rankings cover different items (only in first: {only_a}, "
            f"only in second: {only_b})"
        )
    if len(map_a) < 2:
        raise ValueError("need at least two items")
    items = sorted(map_a.keys(), key=str)
    a = np.array([map_a[i] for i in items])
    b = np.array([map_b[i] for i in items])
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise ValueError("correlation undefined for a constant ranking")
    rho = scipy.stats.spearmanr(a, b).statistic
    return float(rho)


_PERCENT_COLUMNS = ("Acc", "P", "R", "F1")


def render_report_table(reports: Mapping[str, EvalReport]) -> str:
    """Aligned text table, one row per system, percent with one decimal."""
    if not reports:
        raise ValueError("no reports to render")
    name_width = max(len("System"), max(len(name) for name in reports))
    header = "System".ljust(name_width) + "".join(
        col.rjust(8) for col in _PERCENT_COLUMNS
    )
    lines = [header, "-" * len(header)]
    for name, report in reports.items():
        cells = (report.accuracy, report.precision, report.recall, report.f1)
        lines.append(
            name.ljust(name_width)
            + "".join(f"{100 * value:8.1f}" for value in cells)
        )
    return "\n".join(lines)


def render_confusion(report: EvalReport) -> str:
    """Text grid of the confusion matrix (rows actual, columns predicted)."""
    labels = ("other", "impact-revealing")
    width = max(len(label) for label in labels) + 2
    header = " " * width + "".join(label.rjust(width) for label in labels)
    lines = [header]
    for label, row in zip(labels, report.confusion):
        lines.append(label.rjust(width) + "".join(str(v).rjust(width) for v in row))
    return "\n".join(lines)
