"""Pipeline configuration: defaults, config file, environment, flags.

Precedence, lowest to highest: built-in defaults, YAML config file,
``CRISP_*`` environment variables, command-line flags.  API keys are
read directly from the environment by the components that need them
and never appear in config files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from .judge.config import JudgeConfig

AGGREGATION_MODES = ("majority", "ordreg")

ENV_PREFIX = "CRISP_"
_ENV_KEYS = {
    "CRISP_PROVIDER": "provider",
    "CRISP_MODEL": "model",
    "CRISP_MASTER_SEED": "master_seed",
    "CRISP_CACHE_DIR": "cache_dir",
    "CRISP_BUNDLES": "bundles",
    "CRISP_GROUND_TRUTH": "ground_truth",
    "CRISP_MODE": "mode",
    "CRISP_RRF_K": "rrf_k",
    "CRISP_OUT_DIR": "out_dir",
    "CRISP_MODEL_PATH": "model_path",
}
_INT_KEYS = {"master_seed", "rrf_k", "max_context_tokens"}
_FLOAT_KEYS = {"temperature", "top_p", "drop_rate", "duplicate_rate", "hallucination_rate"}


@dataclass(frozen=True)
class MockRates:
    """Noise rates for the deterministic mock judge."""

    drop_rate: float = 0.0
    duplicate_rate: float = 0.0
    hallucination_rate: float = 0.0

    def __post_init__(self) -> None:
        for name in ("drop_rate", "duplicate_rate", "hallucination_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline invocation needs, resolved and validated."""

    judge: JudgeConfig = field(default_factory=JudgeConfig)
    master_seed: int = 0
    cache_dir: Path = Path(".crisp-cache")
    bundles: Path = Path("bundles.jsonl")
    ground_truth: Path | None = None
    mode: str = "majority"
    rrf_k: int = 60
    out_dir: Path = Path("out")
    model_path: Path = Path("model.json")
    mock_rates: MockRates = field(default_factory=MockRates)

    def __post_init__(self) -> None:
        if self.mode not in AGGREGATION_MODES:
            raise ValueError(
                f"mode must be one of {AGGREGATION_MODES}, got {self.mode!r}"
            )
        if self.rrf_k < 1:
            raise ValueError(f"rrf_k must be positive, got {self.rrf_k}")


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    return value


def _read_config_file(path: Path) -> dict[str, Any]:
    data = yaml.safe_load(path.read_text())
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a mapping")
    flat = dict(data)
    mock = flat.pop("mock", {}) or {}
    if not isinstance(mock, dict):
        raise ValueError(f"{path}: 'mock' must be a mapping")
    for key, value in mock.items():
        flat[key] = value
    return flat


def load_config(
    config_path: Path | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Resolve a RunConfig from file, environment, and explicit flags."""
    env = os.environ if env is None else env
    merged: dict[str, Any] = {}
    if config_path is not None:
        merged.update(_read_config_file(Path(config_path)))
    for env_key, key in _ENV_KEYS.items():
        if env_key in env:
            merged[key] = env[env_key]
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    merged = {key: _coerce(key, value) for key, value in merged.items()}

    judge_kwargs = {}
    for key in ("provider", "model", "temperature", "top_p", "max_context_tokens"):
        if key in merged:
            judge_kwargs[key] = merged.pop(key)
    if "prompt_template" in merged:
        template = merged.pop("prompt_template")
        judge_kwargs["prompt_template_path"] = (
            Path(template) if template is not None else None
        )

    rate_kwargs = {}
    for key in ("drop_rate", "duplicate_rate", "hallucination_rate"):
        if key in merged:
            rate_kwargs[key] = merged.pop(key)

    config_kwargs: dict[str, Any] = {}
    for key in ("master_seed", "mode", "rrf_k"):
        if key in merged:
            config_kwargs[key] = merged.pop(key)
    for key in ("cache_dir", "bundles", "ground_truth", "out_dir", "model_path"):
        if key in merged:
            value = merged.pop(key)
            config_kwargs[key] = Path(value) if value is not None else None
    if merged:
        unknown = ", ".join(sorted(merged))
        raise ValueError(f"unknown config keys: {unknown}")

    return RunConfig(
        judge=JudgeConfig(**judge_kwargs),
        mock_rates=MockRates(**rate_kwargs),
        **config_kwargs,
    )


def with_overrides(config: RunConfig, **kwargs: Any) -> RunConfig:
    """Functional update helper for tests and subcommand glue."""
    return replace(config, **{k: v for k, v in kwargs.items() if v is not None})
