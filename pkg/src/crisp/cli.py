"""Command-line entry point.

Subcommands mirror the pipeline stages: fetch, rank, aggregate, train,
evaluate, analyze-missing, serve.  Configuration resolves in order of
defaults, config file, CRISP_* environment variables, then flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import AGGREGATION_MODES, RunConfig, load_config
from .corpus.cache import ResponseCache
from .corpus.client import ApiError, NotFoundError, ScholarClient, TokenBucket
from . import pipeline


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="YAML config file")
    parser.add_argument("--bundles", type=Path, default=None, help="bundles JSONL path")
    parser.add_argument("--out-dir", type=Path, default=None, help="output directory")
    parser.add_argument("--cache-dir", type=Path, default=None, help="response cache directory")
    parser.add_argument("--master-seed", type=int, default=None, help="corpus-level seed")
    parser.add_argument("--provider", default=None, help="judge provider: 'mock' or a chat-API base URL")
    parser.add_argument("--model", default=None, help="judge model name")
    parser.add_argument("--prompt-template", type=Path, default=None, dest="prompt_template", help="override the built-in prompt template")
    parser.add_argument("--rrf-k", type=int, default=None, help="rank-fusion constant k")
    parser.add_argument("--mode", choices=AGGREGATION_MODES, default=None, help="label aggregation mode")
    parser.add_argument("--model-path", type=Path, default=None, help="ordinal model JSON path")
    parser.add_argument("--ground-truth", type=Path, default=None, help="binary ground-truth file (jsonl/csv/tsv)")
    parser.add_argument("--drop-rate", type=float, default=None, help="mock judge: per-reference drop probability")
    parser.add_argument("--duplicate-rate", type=float, default=None, help="mock judge: per-reference duplicate probability")
    parser.add_argument("--hallucination-rate", type=float, default=None, help="mock judge: per-slot fabrication probability")


_OVERRIDE_KEYS = (
    "bundles",
    "out_dir",
    "cache_dir",
    "master_seed",
    "provider",
    "model",
    "prompt_template",
    "rrf_k",
    "mode",
    "model_path",
    "ground_truth",
    "drop_rate",
    "duplicate_rate",
    "hallucination_rate",
)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    overrides = {key: getattr(args, key, None) for key in _OVERRIDE_KEYS}
    return load_config(config_path=args.config, overrides=overrides)


def _build_client(config: RunConfig, rate_per_second: float) -> ScholarClient:
    return ScholarClient(
        cache=ResponseCache(config.cache_dir),
        rate_limiter=TokenBucket(rate_per_second=rate_per_second),
    )


def cmd_fetch(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    client = _build_client(config, args.rate)
    try:
        outcome = pipeline.fetch_corpus(config, args.target, client)
    except NotFoundError as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return 1
    except ApiError as exc:
        print(f"fetch failed: {exc}", file=sys.stderr)
        return 1
    print(
        f"target {outcome.target_id}: {outcome.citing_found} citing papers, "
        f"{outcome.bundles_written} bundles written to {config.bundles} "
        f"({outcome.skipped_empty} skipped with empty reference lists)"
    )
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    try:
        outcome = pipeline.rank_corpus(config)
    except (OSError, ValueError) as exc:
        print(f"rank failed: {exc}", file=sys.stderr)
        return 1
    print(
        f"ranked {outcome.papers} citing papers: {outcome.files_written} run files "
        f"in {config.out_dir}, {outcome.failures} failed runs"
    )
    return 0 if outcome.files_written or not outcome.papers else 1


def cmd_aggregate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    try:
        outcome = pipeline.aggregate_corpus(config)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"aggregate failed: {exc}", file=sys.stderr)
        return 1
    print(
        f"wrote {outcome.fused_written} fused rankings to {config.out_dir} "
        f"({outcome.skipped_no_runs} papers had no runs)"
    )
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    try:
        outcome = pipeline.train_corpus(
            config, alpha=args.alpha, tol=args.tol, max_iter=args.max_iter
        )
    except (OSError, ValueError) as exc:
        print(f"train failed: {exc}", file=sys.stderr)
        return 1
    model = outcome.model
    status = "converged" if model.converged else "NOT converged"
    print(
        f"trained on {outcome.rows} pairs ({outcome.excluded_pairs} held out): "
        f"{status}, grad norm {model.grad_norm:.3e}, saved to {outcome.model_path}"
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    try:
        outcome = pipeline.evaluate_corpus(config)
    except pipeline.EvaluationMismatchError as exc:
        print(f"evaluate failed: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"evaluate failed: {exc}", file=sys.stderr)
        return 1
    print(outcome.report_text.read_text(), end="")
    print(f"report written to {outcome.report_json} and {outcome.report_text}")
    return 0


def cmd_analyze_missing(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    try:
        outcome = pipeline.analyze_missing(config, bin_width=args.bin_width)
    except (OSError, ValueError) as exc:
        print(f"analyze-missing failed: {exc}", file=sys.stderr)
        return 1
    if not outcome.curve:
        print("no ranked papers found; nothing to analyze")
        return 0
    width = args.bin_width
    print(f"{'references':>12}  {'mean missing':>12}")
    for start, mean in outcome.curve:
        print(f"{f'{start}-{start + width - 1}':>12}  {mean:>12.2f}")
    print(f"curve written to {outcome.curve_json}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    import uvicorn

    from .server import create_app, default_static_dir

    static_dir = args.static_dir if args.static_dir is not None else default_static_dir()
    app = create_app(
        bundles_path=config.bundles,
        out_dir=Path(config.out_dir),
        master_seed=config.master_seed,
        static_dir=static_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crisp",
        description=(
            "Rank a paper's references by their impact on it: permuted "
            "LLM-judge runs, reciprocal-rank fusion, ordinal labels, and "
            "evaluation against binary ground truth."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="resolve a paper and cache its citers + their references")
    p.add_argument("target", help="paper id (40-char hex) or title to resolve")
    p.add_argument("--rate", type=float, default=1.0, help="API requests per second")
    _add_common_flags(p)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("rank", help="run the judge three times per citing paper")
    _add_common_flags(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("aggregate", help="fuse runs into one ranking per citing paper")
    _add_common_flags(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("train", help="fit the ordinal impact model on pooled ranks")
    p.add_argument("--alpha", type=float, default=1.0, help="L2 penalty on weights")
    p.add_argument("--tol", type=float, default=1e-6, help="gradient-norm stop tolerance")
    p.add_argument("--max-iter", type=int, default=1000, help="optimizer iteration cap")
    _add_common_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score fused labels against binary ground truth")
    _add_common_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze-missing", help="missing-reference curve by reference-list size")
    p.add_argument("--bin-width", type=int, default=20, help="reference-count bucket width")
    _add_common_flags(p)
    p.set_defaults(func=cmd_analyze_missing)

    p = sub.add_parser("serve", help="serve the annotation API and UI")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static-dir", type=Path, default=None, help="built UI assets to serve at /")
    _add_common_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
