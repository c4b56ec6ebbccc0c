"""Judge/provider configuration."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass
class JudgeConfig:
    """Settings for one LLM judge.

    ``max_context_tokens`` bounds the rendered prompt (estimated);
    prompts exceeding it are refused rather than silently truncated.
    ``prompt_template_path`` overrides the packaged ranking template.
    """

    provider: str = "mock"
    model: str = "mock-judge"
    temperature: float = 0.7
    top_p: float = 0.8
    max_context_tokens: int = 200_000
    prompt_template_path: Path | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature out of range: {self.temperature}")
        if not 0.0 <= self.top_p <= 1.0:
            raise ValueError(f"top_p out of range: {self.top_p}")
        if self.max_context_tokens <= 0:
            raise ValueError("max_context_tokens must be positive")
