"""Operator entry point: ingest -> evaluate -> analyze.

One declarative JSON config drives evaluate/analyze; command-line flags
win over config values. Exit codes: 0 ok, 1 analysis error, 2 I/O or
config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field

from . import corpus, pipeline, report
from .clients import (
    BackendError,
    DiskCache,
    HttpCompletionClient,
    HttpEmbeddingClient,
    HttpToxicityClient,
    MockCompletionClient,
    MockEmbeddingClient,
    MockPairScorer,
    MockToxicityClient,
    CompletionPairScorer,
    ScorerEndpoint,
)
from .metrics import GROUPS
from .pipeline import EvalSettings, ScorerSet

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


_SCORER_KEYS_MOCK = {"mode", "seed", "embed_dim", "varied_completions"}
_SCORER_KEYS_HTTP = {
    "mode",
    "embed_url",
    "completion_url",
    "toxicity_url",
    "toxicity_key_env",
    "cache_dir",
    "timeout",
    "max_retries",
    "rate_limit_per_min",
}
_TOP_KEYS = {
    "prompts",
    "models",
    "metrics",
    "scorers",
    "seed",
    "alpha",
    "mu",
    "window_size",
    "topics",
    "batch_size",
    "reflection",
    "change_pairs",
    "out_dir",
}
_TOPIC_KEYS = {"k", "n"}
_REFLECTION_KEYS = {"features", "dim", "epochs", "learning_rate", "seed", "mu"}


@dataclass
class RunConfig:
    prompts: str
    models: dict[str, str]
    out_dir: str
    metrics: list[str] = field(default_factory=lambda: list(GROUPS))
    scorers: dict = field(default_factory=lambda: {"mode": "mock", "seed": 0})
    seed: int = 0
    alpha: float = 0.05
    mu: float = 0.3
    window_size: int = 110
    topics: dict = field(default_factory=lambda: {"k": 3, "n": 4})
    batch_size: int = 5
    reflection: dict = field(default_factory=dict)
    change_pairs: list[list[str]] = field(default_factory=list)
    offline: bool = False


def _reject_unknown(d: dict, allowed: set[str], where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "config")
    for key in ("prompts", "models", "out_dir"):
        if key not in data:
            raise ConfigError(f"config missing required key: {key}")
    scorers = data.get("scorers", {"mode": "mock", "seed": 0})
    mode = scorers.get("mode")
    if mode == "mock":
        _reject_unknown(scorers, _SCORER_KEYS_MOCK, "scorers")
    elif mode == "http":
        _reject_unknown(scorers, _SCORER_KEYS_HTTP, "scorers")
    else:
        raise ConfigError(f"scorers.mode must be 'mock' or 'http', got {mode!r}")
    _reject_unknown(data.get("topics", {}), _TOPIC_KEYS, "topics")
    _reject_unknown(data.get("reflection", {}), _REFLECTION_KEYS, "reflection")
    unknown_groups = set(data.get("metrics", [])) - set(GROUPS)
    if unknown_groups:
        raise ConfigError(f"unknown metric groups: {sorted(unknown_groups)}")
    cfg = RunConfig(
        prompts=data["prompts"],
        models=dict(data["models"]),
        out_dir=data["out_dir"],
        metrics=list(data.get("metrics", list(GROUPS))),
        scorers=scorers,
        seed=int(data.get("seed", 0)),
        alpha=float(data.get("alpha", 0.05)),
        mu=float(data.get("mu", 0.3)),
        window_size=int(data.get("window_size", 110)),
        topics=dict(data.get("topics", {"k": 3, "n": 4})),
        batch_size=int(data.get("batch_size", 5)),
        reflection=dict(data.get("reflection", {})),
        change_pairs=[list(p) for p in data.get("change_pairs", [])],
    )
    if len(cfg.models) < 1:
        raise ConfigError("config.models must name at least one model")
    return cfg


def config_snapshot(cfg: RunConfig) -> dict:
    return {
        "prompts": cfg.prompts,
        "models": cfg.models,
        "metrics": cfg.metrics,
        "scorers": cfg.scorers,
        "seed": cfg.seed,
        "alpha": cfg.alpha,
        "mu": cfg.mu,
        "window_size": cfg.window_size,
        "topics": cfg.topics,
        "batch_size": cfg.batch_size,
        "reflection": cfg.reflection,
        "change_pairs": cfg.change_pairs,
        "offline": cfg.offline,
    }


def build_scorers(cfg: RunConfig) -> ScorerSet:
    scorers = cfg.scorers
    if scorers["mode"] == "mock":
        seed = int(scorers.get("seed", 0))
        completion = MockCompletionClient(
            seed=seed, varied=bool(scorers.get("varied_completions", False))
        )
        return ScorerSet(
            embed_client=MockEmbeddingClient(dim=int(scorers.get("embed_dim", 16)), seed=seed),
            completion_client=completion,
            toxicity_client=MockToxicityClient(seed=seed),
            pair_scorer=MockPairScorer(seed=seed),
        )
    if cfg.offline:
        raise ConfigError("--offline requires scorers.mode == 'mock' or a warm cache")
    cache_dir = scorers.get("cache_dir", os.path.join(cfg.out_dir, "cache"))
    common = {
        "timeout": float(scorers.get("timeout", 10.0)),
        "max_retries": int(scorers.get("max_retries", 3)),
        "rate_limit_per_min": int(scorers.get("rate_limit_per_min", 60)),
    }

    def endpoint(url_key: str, auth_env: str | None = None) -> ScorerEndpoint:
        if url_key not in scorers:
            raise ConfigError(f"scorers.{url_key} required for http mode")
        return ScorerEndpoint(base_url=scorers[url_key], auth_env=auth_env, **common)

    completion = HttpCompletionClient(
        endpoint("completion_url"), cache=DiskCache(os.path.join(cache_dir, "complete"))
    )
    return ScorerSet(
        embed_client=HttpEmbeddingClient(
            endpoint("embed_url"), cache=DiskCache(os.path.join(cache_dir, "embed"))
        ),
        completion_client=completion,
        toxicity_client=HttpToxicityClient(
            endpoint("toxicity_url", scorers.get("toxicity_key_env")),
            cache=DiskCache(os.path.join(cache_dir, "toxicity")),
        ),
        pair_scorer=CompletionPairScorer(completion),
    )


def cmd_ingest(args: argparse.Namespace) -> int:
    store = corpus.parse_dump_files(args.posts, args.comments)
    filtered = corpus.filter_posts(store)
    pairs = corpus.build_pairs(filtered)
    spec = corpus.SplitSpec(train_count=args.train, test_count=args.test, seed=args.seed)
    train, test, manifest = corpus.split(pairs, spec)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "train.jsonl"), "w", encoding="utf-8") as fh:
        if train:
            corpus.export_training(train, fh)
    with open(os.path.join(args.out, "test.jsonl"), "w", encoding="utf-8") as fh:
        if test:
            corpus.export_training(test, fh)
    manifest_dict = {
        "seed": manifest.seed,
        "train_count": manifest.train_count,
        "test_count": manifest.test_count,
        "discarded": manifest.discarded,
        "posts_ingested": store.post_count,
        "comments_ingested": store.comment_count,
        "malformed_posts": store.malformed_posts,
        "malformed_comments": store.malformed_comments,
        "quarantined_comments": len(store.quarantined_comments),
        "posts_surviving_filters": filtered.post_count,
        "pairs_built": len(pairs),
    }
    with open(os.path.join(args.out, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest_dict, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(json.dumps(manifest_dict, sort_keys=True))
    return EXIT_OK


def _settings_from_config(
    cfg: RunConfig, jobs: int | None, stopwords_path: str | None = None
) -> EvalSettings:
    reflection = cfg.reflection
    return EvalSettings(
        metric_groups=cfg.metrics,
        window_size=cfg.window_size,
        topic_count=int(cfg.topics.get("k", 3)),
        topic_size=int(cfg.topics.get("n", 4)),
        batch_size=cfg.batch_size,
        stopwords_path=stopwords_path,
        reflection_features=reflection.get("features", "hash"),
        reflection_dim=int(reflection.get("dim", 64)),
        reflection_epochs=int(reflection.get("epochs", 200)),
        reflection_learning_rate=float(reflection.get("learning_rate", 0.5)),
        reflection_seed=int(reflection.get("seed", cfg.seed)),
        mu=float(reflection.get("mu", cfg.mu)),
        jobs=jobs,
    )


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    cfg.offline = bool(args.offline)
    prompts = pipeline.load_prompts(cfg.prompts)
    responses = {
        model_id: pipeline.load_responses(path, model_id)
        for model_id, path in sorted(cfg.models.items())
    }
    scorers = build_scorers(cfg)
    settings = _settings_from_config(cfg, args.jobs, stopwords_path=args.stopwords)
    result = pipeline.evaluate(prompts, responses, settings, scorers)
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "raw_metrics.jsonl"), "w", encoding="utf-8") as fh:
        report.save_raw_records(result.records, fh)
    with open(os.path.join(cfg.out_dir, "missing.log"), "w", encoding="utf-8") as fh:
        for entry in result.missing:
            fh.write(entry.line())
            fh.write("\n")
    print(
        f"evaluated {len(result.records)} metric records "
        f"({len(result.missing)} missing) -> {cfg.out_dir}"
    )
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    if args.alpha is not None:
        cfg.alpha = args.alpha
    raw_path = os.path.join(cfg.out_dir, "raw_metrics.jsonl")
    with open(raw_path, encoding="utf-8") as fh:
        records = report.load_raw_records(fh)
    missing = []
    missing_path = os.path.join(cfg.out_dir, "missing.log")
    if os.path.exists(missing_path):
        with open(missing_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line:
                    model_id, metric_id, unit_id, reason = line.split("\t", 3)
                    missing.append(report.MissingEntry(model_id, metric_id, unit_id, reason))
    result = report.assemble(
        records,
        config_snapshot=config_snapshot(cfg),
        alpha=cfg.alpha,
        change_pairs=[tuple(p) for p in cfg.change_pairs],
        missing=missing,
    )
    outputs = report.render(result, cfg.out_dir)
    print(f"report written: {outputs['report.md']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="supporteval",
        description="Curate prompt/response corpora, score model replies, and rank model configurations.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="filter a raw dump and export train/test pairs")
    ingest.add_argument("--posts", required=True, help="posts JSONL file")
    ingest.add_argument("--comments", required=True, help="comments JSONL file")
    ingest.add_argument("--out", required=True, help="output directory")
    ingest.add_argument("--seed", type=int, default=0, help="shuffle seed")
    ingest.add_argument("--train", type=int, default=21000, help="training pair count")
    ingest.add_argument("--test", type=int, default=5000, help="test pair count")
    ingest.set_defaults(func=cmd_ingest)

    evaluate = sub.add_parser("evaluate", help="compute every enabled metric per response")
    evaluate.add_argument("--config", required=True, help="run config JSON")
    evaluate.add_argument("--jobs", type=int, default=None, help="worker pool size")
    evaluate.add_argument("--offline", action="store_true", help="forbid network; mocks/cache only")
    evaluate.add_argument("--out-dir", default=None, help="override config out_dir")
    evaluate.add_argument(
        "--stopwords", default=None, help="stop-word list file (one word per line)"
    )
    evaluate.set_defaults(func=cmd_evaluate)

    analyze = sub.add_parser("analyze", help="run the statistics engine and render the report")
    analyze.add_argument("--config", required=True, help="run config JSON")
    analyze.add_argument("--alpha", type=float, default=None, help="significance level override")
    analyze.add_argument("--out-dir", default=None, help="override config out_dir")
    analyze.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, BackendError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
