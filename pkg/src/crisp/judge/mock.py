"""Offline synthetic judge.

Ranks references by a hidden per-reference score derived from a stable
hash of (paper id, seed), so the "true" ranking is known in advance and
independent of presentation order.  Categories follow position cutoffs:
top ceil(20%) High, bottom ceil(30%) Low, Medium in between.  Optional
noise injects drops, duplicates, and hallucinated references; noise
draws are coupled per reference so raising a rate only adds events.

All randomness comes from sha256, never from ``hash()``, so output for
a fixed seed is byte-identical across processes.
"""

from __future__ import annotations

import hashlib
import json
import math

from ..corpus.model import CitingPaperBundle
from ..labels import ImpactCategory

HIGH_FRACTION = 0.2
LOW_FRACTION = 0.3


def _u01(*parts: str) -> float:
    digest = hashlib.sha256("|".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def hidden_score(paper_id: str, seed: int) -> float:
    """Stable pseudo-random impact score in [0, 1); higher is better."""
    return _u01("score", paper_id, str(seed))


def category_for_position(position: int, total: int) -> ImpactCategory:
    """Position-based category: rank 1 is the most impactful.

    High takes precedence over Low when the cutoffs overlap on very
    short lists.
    """
    high_cut = math.ceil(HIGH_FRACTION * total)
    low_cut = math.ceil(LOW_FRACTION * total)
    if position <= high_cut:
        return ImpactCategory.HIGH
    if position > total - low_cut:
        return ImpactCategory.LOW
    return ImpactCategory.MEDIUM


def planted_categories(bundle: CitingPaperBundle, seed: int) -> dict[str, ImpactCategory]:
    """Zero-noise category per reference: the ground truth the mock plants."""
    order = true_ranking(bundle.reference_ids(), seed)
    return {
        pid: category_for_position(pos, len(order))
        for pos, pid in enumerate(order, start=1)
    }


def true_ranking(paper_ids, seed: int) -> list[str]:
    return sorted(paper_ids, key=lambda pid: (-hidden_score(pid, seed), pid))


def synthesize_ranking(
    references: list[tuple[str, str, str]],
    permutation: list[str],
    seed: int,
    drop_rate: float = 0.0,
    duplicate_rate: float = 0.0,
    hallucination_rate: float = 0.0,
) -> str:
    """Core synthesis over (paper_id, title, joined_contexts) triples.

    ``permutation`` identifies the run (noise draws depend on it), so
    the three runs of one paper see independent noise while sharing the
    same hidden scores.
    """
    by_id = {pid: (title, contexts) for pid, title, contexts in references}
    perm_digest = hashlib.sha256("|".join(permutation).encode("utf-8")).hexdigest()

    def u(tag: str, key: str) -> float:
        return _u01("noise", str(seed), perm_digest, tag, key)

    order = true_ranking(list(by_id), seed)
    emitted: list[str] = [pid for pid in order if u("drop", pid) >= drop_rate]

    extras: list[str] = [pid for pid in emitted if u("dup", pid) < duplicate_rate]
    for i in range(len(order)):
        if u("hall", str(i)) < hallucination_rate:
            fake_id = hashlib.sha256(
                f"hallucination|{seed}|{perm_digest}|{i}".encode("utf-8")
            ).hexdigest()[:40]
            if fake_id not in by_id:
                by_id[fake_id] = (f"Unrelated work {i}", "")
                extras.append(fake_id)

    for j, pid in enumerate(extras):
        slot = int(u("slot", f"{pid}:{j}") * (len(emitted) + 1))
        emitted.insert(slot, pid)

    total = len(emitted)
    entries = []
    for position, pid in enumerate(emitted, start=1):
        title, contexts = by_id[pid]
        category = category_for_position(position, total)
        entries.append(
            {
                "rank": position,
                "paperId": pid,
                "title": title,
                "contexts": contexts,
                "reason": f"Synthetic judgment placing this work at position {position} of {total}.",
                "impactCategory": category.to_string(),
            }
        )
    return json.dumps(entries, indent=2, ensure_ascii=False)


def mock_judge(
    bundle: CitingPaperBundle,
    permutation: list[str],
    seed: int,
    drop_rate: float = 0.0,
    duplicate_rate: float = 0.0,
    hallucination_rate: float = 0.0,
) -> str:
    """Deterministic synthetic completion for a bundle."""
    from .prompt import joined_contexts

    references = [
        (ref.cited.id, ref.cited.title, joined_contexts(ref.contexts))
        for ref in bundle.references
    ]
    return synthesize_ranking(
        references,
        permutation,
        seed,
        drop_rate=drop_rate,
        duplicate_rate=duplicate_rate,
        hallucination_rate=hallucination_rate,
    )
