"""Permutation self-consistency engine.

Each citing paper is judged exactly three times, each run seeing the
references in a different seeded random order, which is what cancels
the judge's positional bias.  That makes the provider-call count 3n
over n citing papers; the counter on the adapter verifies it.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..corpus.model import CitingPaperBundle
from .config import JudgeConfig
from .parse import ParseError, RankingRun, parse_ranking_response
from .permute import permute_references
from .prompt import PromptTooLongError, build_ranking_prompt, estimate_tokens, load_template
from .providers import ProviderAdapter, ProviderError

RUNS_PER_PAPER = 3
DEFAULT_RUN_SEEDS = (1, 2, 3)


class PscError(Exception):
    """All runs for a citing paper failed."""

    def __init__(self, message: str, failures: tuple["RunFailure", ...] = ()):
        super().__init__(message)
        self.failures = failures


@dataclass(frozen=True)
class RunFailure:
    citing_id: str
    run_index: int
    seed: int
    error: str


@dataclass
class PscResult:
    citing_id: str
    runs: list[RankingRun]
    failures: list[RunFailure]

    @property
    def succeeded(self) -> bool:
        return bool(self.runs)


def derive_run_seeds(master_seed: int = 0) -> tuple[int, int, int]:
    """Per-run seeds: (1, 2, 3) XOR the corpus-level master seed."""
    return tuple(base ^ master_seed for base in DEFAULT_RUN_SEEDS)


def run_psc(
    bundle: CitingPaperBundle,
    provider: ProviderAdapter,
    config: JudgeConfig,
    seeds: tuple[int, int, int] | None = None,
) -> PscResult:
    """Three independent judging runs over one citing paper.

    A failed run (provider or parse error) is recorded and skipped; the
    result is an error only when every run failed.  Prompts over the
    context budget are refused up front.
    """
    if seeds is None:
        seeds = derive_run_seeds()
    if len(seeds) != RUNS_PER_PAPER:
        raise ValueError(f"expected {RUNS_PER_PAPER} seeds, got {len(seeds)}")
    if len(set(seeds)) != len(seeds):
        raise ValueError(f"run seeds must be pairwise distinct: {seeds}")

    template = load_template(config.prompt_template_path)
    runs: list[RankingRun] = []
    failures: list[RunFailure] = []
    for run_index, seed in enumerate(seeds, start=1):
        permutation = permute_references(bundle, seed)
        prompt = build_ranking_prompt(bundle, permutation, template=template)
        tokens = estimate_tokens(prompt)
        if tokens > config.max_context_tokens:
            raise PromptTooLongError(bundle.citing.id, tokens, config.max_context_tokens)
        try:
            raw = provider.complete(prompt, config)
            runs.append(
                parse_ranking_response(raw, bundle, run_index=run_index, seed=seed)
            )
        except (ProviderError, ParseError) as exc:
            failures.append(
                RunFailure(
                    citing_id=bundle.citing.id,
                    run_index=run_index,
                    seed=seed,
                    error=str(exc),
                )
            )

    if not runs:
        raise PscError(
            f"all {RUNS_PER_PAPER} runs failed for {bundle.citing.id}: "
            + "; ".join(f.error for f in failures),
            failures=tuple(failures),
        )
    return PscResult(citing_id=bundle.citing.id, runs=runs, failures=failures)
