"""Listwise LLM judging of a citing paper's references."""

from .config import JudgeConfig
from .engine import (
    RUNS_PER_PAPER,
    PscError,
    PscResult,
    RunFailure,
    derive_run_seeds,
    run_psc,
)
from .mock import mock_judge, planted_categories, true_ranking
from .parse import ParseError, RankedEntry, RankingRun, parse_ranking_response
from .permute import permute_references
from .prompt import PromptTooLongError, build_ranking_prompt, estimate_tokens
from .providers import (
    HttpChatProvider,
    MockJudgeProvider,
    ProviderAdapter,
    ProviderError,
    make_provider,
)

__all__ = [
    "HttpChatProvider",
    "JudgeConfig",
    "MockJudgeProvider",
    "ParseError",
    "PromptTooLongError",
    "ProviderAdapter",
    "ProviderError",
    "PscError",
    "PscResult",
    "RUNS_PER_PAPER",
    "RankedEntry",
    "RankingRun",
    "RunFailure",
    "build_ranking_prompt",
    "derive_run_seeds",
    "estimate_tokens",
    "make_provider",
    "mock_judge",
    "parse_ranking_response",
    "permute_references",
    "planted_categories",
    "run_psc",
    "true_ranking",
]
