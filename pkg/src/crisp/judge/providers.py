"""Provider adapters: (prompt text, config) -> completion text.

Adapters are safe for concurrent use and count every call they make;
the counter is how the 3-calls-per-citing-paper accounting is checked.
``MockJudgeProvider`` recovers the reference list from the prompt
itself, so the offline path exercises the exact same engine code as a
live provider.
"""

from __future__ import annotations

import os
import re
import threading

import httpx

from .config import JudgeConfig
from .mock import synthesize_ranking

PROVIDER_KEY_ENV = "CRISP_PROVIDER_API_KEY"


class ProviderError(Exception):
    """A completion attempt failed."""


class ProviderAdapter:
    """Base adapter: subclasses implement ``_complete``."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._calls = 0

    @property
    def calls(self) -> int:
        with self._lock:
            return self._calls

    def reset_calls(self) -> None:
        with self._lock:
            self._calls = 0

    def complete(self, prompt: str, config: JudgeConfig) -> str:
        with self._lock:
            self._calls += 1
        return self._complete(prompt, config)

    def _complete(self, prompt: str, config: JudgeConfig) -> str:
        raise NotImplementedError


_PROMPT_REF_PATTERN = re.compile(
    r"paperId: (?P<pid>\S+)\n\s*title: (?P<title>[^\n]*)\n\s*contexts: (?P<contexts>[^\n]*)"
)


class MockJudgeProvider(ProviderAdapter):
    """Offline judge driven by hidden per-reference scores.

    ``score_seed`` fixes the planted ranking; the noise rates control
    synthetic drops, duplicates, and hallucinations per run.
    """

    def __init__(
        self,
        score_seed: int = 0,
        drop_rate: float = 0.0,
        duplicate_rate: float = 0.0,
        hallucination_rate: float = 0.0,
    ):
        super().__init__()
        self.score_seed = score_seed
        self.drop_rate = drop_rate
        self.duplicate_rate = duplicate_rate
        self.hallucination_rate = hallucination_rate

    def _complete(self, prompt: str, config: JudgeConfig) -> str:
        references = [
            (m.group("pid"), m.group("title"), m.group("contexts"))
            for m in _PROMPT_REF_PATTERN.finditer(prompt)
        ]
        if not references:
            raise ProviderError("mock judge found no references in the prompt")
        permutation = [pid for pid, _, _ in references]
        return synthesize_ranking(
            references,
            permutation,
            self.score_seed,
            drop_rate=self.drop_rate,
            duplicate_rate=self.duplicate_rate,
            hallucination_rate=self.hallucination_rate,
        )


class HttpChatProvider(ProviderAdapter):
    """OpenAI-compatible chat-completions endpoint."""

    def __init__(self, base_url: str, timeout: float = 300.0):
        super().__init__()
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(PROVIDER_KEY_ENV)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(base_url=base_url, headers=headers, timeout=timeout)

    def _complete(self, prompt: str, config: JudgeConfig) -> str:
        body = {
            "model": config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": config.temperature,
            "top_p": config.top_p,
        }
        try:
            response = self._client.post("/chat/completions", json=body)
            response.raise_for_status()
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"chat completion failed: {exc}") from exc


def make_provider(config: JudgeConfig, **mock_options) -> ProviderAdapter:
    if config.provider == "mock":
        return MockJudgeProvider(**mock_options)
    if config.provider.startswith("http"):
        return HttpChatProvider(base_url=config.provider)
    raise ValueError(f"unknown provider: {config.provider!r}")
