"""Ranking-prompt construction.

The prompt text lives in an editable template file (packaged default
under ``templates/ranking.txt``) with three placeholders:
``{citing_title}``, ``{reference_count}``, and ``{references}``.  The
references block lists id, title, and joined contexts for every
reference, in the order given by the permutation.
"""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

from ..corpus.model import CitingPaperBundle

CONTEXT_SEPARATOR = " | "


class PromptTooLongError(Exception):
    """Rendered prompt exceeds the configured context budget."""

    def __init__(self, citing_id: str, estimated_tokens: int, budget: int):
        self.citing_id = citing_id
        self.estimated_tokens = estimated_tokens
        self.budget = budget
        super().__init__(
            f"prompt for {citing_id} is ~{estimated_tokens} tokens, "
            f"over the {budget}-token budget; refusing to truncate"
        )


def load_template(path: Path | None = None) -> str:
    if path is not None:
        return Path(path).read_text(encoding="utf-8")
    return (
        resources.files("crisp.judge").joinpath("templates/ranking.txt")
        .read_text(encoding="utf-8")
    )


def joined_contexts(contexts) -> str:
    return CONTEXT_SEPARATOR.join(contexts)


def estimate_tokens(text: str) -> int:
    # Crude 4-chars-per-token heuristic; only used for budget refusal.
    return math.ceil(len(text) / 4)


def build_ranking_prompt(
    bundle: CitingPaperBundle,
    permutation: list[str],
    template: str | None = None,
) -> str:
    """Render the ranking prompt with references in permutation order.

    ``permutation`` must be a bijection over the bundle's reference ids.
    """
    ids = bundle.reference_ids()
    if len(permutation) != len(set(permutation)) or set(permutation) != set(ids):
        raise ValueError(
            "permutation must be a bijection over the bundle's reference ids"
        )
    if template is None:
        template = load_template()

    blocks = []
    for position, paper_id in enumerate(permutation, start=1):
        ref = bundle.reference_by_id(paper_id)
        if not ref.cited.id:
            raise ValueError("reference without an id cannot be ranked")
        blocks.append(
            f"[{position}] paperId: {ref.cited.id}\n"
            f"    title: {ref.cited.title}\n"
            f"    contexts: {joined_contexts(ref.contexts)}"
        )

    return template.format(
        citing_title=bundle.citing.title,
        reference_count=len(permutation),
        references="\n\n".join(blocks),
    )
