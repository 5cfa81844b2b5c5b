"""Per-response metric computation: fans every enabled metric out over
(model, response) units and collects raw metric records plus a ledger of
missing values.

Corpus-level metrics get vector-valued samples so the statistics engine
has something to test: coherence yields one value per extracted topic,
and the diversity/bias scores are computed over fixed-size batches of
consecutive responses (a trailing batch of fewer than two responses is
dropped). Response-level metrics yield one value per prompt.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import coherence, overlap, semantic, support, textstats
from .clients import BackendError, BackendUnavailable
from .metrics import metrics_for_groups
from .report import MissingEntry, RawMetricRecord
from .safety import TOXICITY_ATTRIBUTES, score_toxicity

logger = logging.getLogger(__name__)

GENERIC_NON_REFLECTIONS = (
    "ok thanks for sharing",
    "that is interesting",
    "i see, good luck with everything",
    "thanks for the update",
)


@dataclass(frozen=True)
class PromptUnit:
    prompt_id: str
    prompt_text: str
    reference_text: str


@dataclass(frozen=True)
class ResponseUnit:
    prompt_id: str
    model_id: str
    response_text: str


@dataclass
class ScorerSet:
    embed_client: object
    completion_client: object
    toxicity_client: object
    pair_scorer: object


@dataclass
class EvalSettings:
    metric_groups: list[str]
    window_size: int = coherence.DEFAULT_WINDOW_SIZE
    topic_count: int = 3
    topic_size: int = 4
    batch_size: int = 5
    stopwords_path: str | None = None
    reflection_features: str = "hash"
    reflection_dim: int = 64
    reflection_epochs: int = 200
    reflection_learning_rate: float = 0.5
    reflection_seed: int = 0
    mu: float = support.DEFAULT_MARGIN
    jobs: int | None = None


@dataclass
class EvalResult:
    records: list[RawMetricRecord] = field(default_factory=list)
    missing: list[MissingEntry] = field(default_factory=list)


def load_prompts(path: str) -> dict[str, PromptUnit]:
    """Prompt units from an exported pairs file; the human completion is
    the scoring reference."""
    prompts = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            prompts[d["prompt_id"]] = PromptUnit(
                prompt_id=d["prompt_id"],
                prompt_text=d["prompt"],
                reference_text=d["completion"],
            )
    return prompts


def load_responses(path: str, model_id: str) -> list[ResponseUnit]:
    units = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            units.append(
                ResponseUnit(
                    prompt_id=d["prompt_id"],
                    model_id=model_id,
                    response_text=d["response"],
                )
            )
    return sorted(units, key=lambda u: u.prompt_id)


def _response_metrics(
    unit: ResponseUnit,
    prompt: PromptUnit,
    enabled: set[str],
    scorers: ScorerSet,
    settings: EvalSettings,
    reflection_scorer: support.ReflectionScorer | None,
    featurize,
) -> EvalResult:
    out = EvalResult()

    def record(metric_id: str, value: float) -> None:
        out.records.append(
            RawMetricRecord(
                model_id=unit.model_id,
                metric_id=metric_id,
                unit_id=unit.prompt_id,
                value=float(value),
            )
        )

    def miss(metric_id: str, reason: str) -> None:
        out.missing.append(
            MissingEntry(
                model_id=unit.model_id,
                metric_id=metric_id,
                unit_id=unit.prompt_id,
                reason=reason,
            )
        )

    if "readability" in enabled:
        try:
            scores = textstats.score_text(unit.response_text)
            for metric_id, value in scores.as_dict().items():
                record(metric_id, value)
        except textstats.DegenerateTextError as exc:
            for metric_id in ("fkg", "gfi", "smog", "ari", "cli"):
                miss(metric_id, str(exc))

    if "rouge" in enabled:
        cand = overlap.tokenize(unit.response_text)
        ref = overlap.tokenize(prompt.reference_text)
        for metric_id, fn in (
            ("rouge1", lambda: overlap.rouge_n(cand, ref, 1)),
            ("rouge2", lambda: overlap.rouge_n(cand, ref, 2)),
            ("rougeL", lambda: overlap.rouge_l(cand, ref)),
        ):
            try:
                record(metric_id, fn().recall)
            except ValueError as exc:
                miss(metric_id, str(exc))

    if "bertscore" in enabled:
        cand = overlap.tokenize(unit.response_text)
        ref = overlap.tokenize(prompt.reference_text)
        try:
            if not cand or not ref:
                raise ValueError("empty token list")
            scores = semantic.bertscore(
                scorers.embed_client.embed(cand), scorers.embed_client.embed(ref)
            )
            record("bert_precision", scores.bert_precision)
            record("bert_recall", scores.bert_recall)
            record("bert_f1", scores.bert_f1)
        except (ValueError, BackendError) as exc:
            for metric_id in ("bert_precision", "bert_recall", "bert_f1"):
                miss(metric_id, str(exc))

    if "bleurt" in enabled:
        value = semantic.bleurt_score(unit.response_text, prompt.reference_text, scorers.pair_scorer)
        if value is None:
            miss("bleurt", "pair scorer unavailable")
        else:
            record("bleurt", value)

    if "toxicity" in enabled:
        try:
            scores = score_toxicity(unit.response_text, scorers.toxicity_client)
            for attr in TOXICITY_ATTRIBUTES:
                record(attr, getattr(scores, attr))
        except BackendUnavailable as exc:
            for attr in TOXICITY_ATTRIBUTES:
                miss(attr, str(exc))
        except BackendError as exc:
            raise BackendError(f"toxicity scorer failed for record {unit.prompt_id}: {exc}") from exc

    if "empathy" in enabled:
        scores = support.judge_empathy(
            prompt.prompt_text, unit.response_text, scorers.completion_client
        )
        if scores is None:
            for metric_id in ("interpretation", "emotional_reaction", "exploration"):
                miss(metric_id, "judge reply unparseable after retry")
        else:
            record("interpretation", scores.interpretation)
            record("emotional_reaction", scores.emotional_reaction)
            record("exploration", scores.exploration)

    if "reflection" in enabled and reflection_scorer is not None:
        try:
            value = reflection_scorer.score(
                featurize(prompt.prompt_text), featurize(unit.response_text)
            )
            record("reflection", value)
        except (ValueError, BackendError) as exc:
            miss("reflection", str(exc))

    return out


def _batches(units: list[ResponseUnit], size: int) -> list[list[ResponseUnit]]:
    chunks = [units[i : i + size] for i in range(0, len(units), size)]
    return [c for c in chunks if len(c) >= 2]


def _corpus_metrics(
    model_id: str,
    units: list[ResponseUnit],
    enabled: set[str],
    scorers: ScorerSet,
    settings: EvalSettings,
) -> EvalResult:
    out = EvalResult()
    texts = [u.response_text for u in units]

    if "coherence" in enabled:
        docs = [overlap.tokenize(t) for t in texts]
        try:
            stats = coherence.build_cooccurrence(docs, settings.window_size)
            topics = coherence.extract_topics(
                docs,
                settings.topic_count,
                settings.topic_size,
                stats=stats,
                stopwords=coherence.load_stopwords(settings.stopwords_path),
            )
            for topic in topics:
                unit_id = f"topic:{topic.topic_id:03d}"
                out.records.append(
                    RawMetricRecord(model_id, "c_v", unit_id, coherence.coherence_cv(topic, stats))
                )
                out.records.append(
                    RawMetricRecord(
                        model_id, "c_npmi", unit_id, coherence.coherence_cnpmi(topic, stats)
                    )
                )
        except ValueError as exc:
            for metric_id in ("c_v", "c_npmi"):
                out.missing.append(MissingEntry(model_id, metric_id, "corpus", str(exc)))

    if "genbit" in enabled:
        sim = semantic.shifted_cosine_similarity_fn(scorers.embed_client)
        for i, batch in enumerate(_batches(units, settings.batch_size)):
            unit_id = f"batch:{i:03d}"
            try:
                score = semantic.genbit_diversity([u.response_text for u in batch], sim)
                if not np.isfinite(score.g):
                    out.missing.append(
                        MissingEntry(model_id, "genbit_diversity", unit_id, "unbounded diversity")
                    )
                else:
                    out.records.append(
                        RawMetricRecord(model_id, "genbit_diversity", unit_id, score.g)
                    )
            except (ValueError, BackendError) as exc:
                out.missing.append(MissingEntry(model_id, "genbit_diversity", unit_id, str(exc)))

    if "gender_bias" in enabled:
        lexicon = semantic.load_gendered_lexicon()
        for i, batch in enumerate(_batches(units, settings.batch_size)):
            unit_id = f"batch:{i:03d}"
            try:
                value = semantic.gender_bias_abcas([u.response_text for u in batch], lexicon)
                out.records.append(RawMetricRecord(model_id, "gender_bias_abcas", unit_id, value))
            except ValueError as exc:
                out.missing.append(MissingEntry(model_id, "gender_bias_abcas", unit_id, str(exc)))

    return out


def build_reflection_training(
    prompts: list[PromptUnit], featurize
) -> list[support.ReflectionTriple]:
    """Desk-scale training triples constructed from the human references.

    The full reference stands in for a complex reflection, its first
    half for a simple one, and a rotating generic phrase for a
    non-reflection; mismatched responses come from the next prompt.
    """
    triples = []
    n = len(prompts)
    for i, unit in enumerate(prompts):
        other = prompts[(i + 1) % n]
        ref_tokens = unit.reference_text.split()
        half = " ".join(ref_tokens[: max(1, len(ref_tokens) // 2)])
        other_tokens = other.reference_text.split()
        other_half = " ".join(other_tokens[: max(1, len(other_tokens) // 2)])
        triples.append(
            support.ReflectionTriple(
                prompt_features=featurize(unit.prompt_text),
                cr_features=featurize(unit.reference_text),
                sr_features=featurize(half),
                nr_features=featurize(GENERIC_NON_REFLECTIONS[i % len(GENERIC_NON_REFLECTIONS)]),
                mismatched_cr_features=featurize(other.reference_text),
                mismatched_sr_features=featurize(other_half),
            )
        )
    return triples


def make_featurizer(settings: EvalSettings, scorers: ScorerSet):
    if settings.reflection_features == "hash":
        return lambda text: support.hashed_features(text, settings.reflection_dim)
    if settings.reflection_features == "embed":
        return lambda text: scorers.embed_client.embed([text]).values[0]
    raise ValueError(f"unknown reflection feature source: {settings.reflection_features}")


def evaluate(
    prompts: dict[str, PromptUnit],
    responses: dict[str, list[ResponseUnit]],
    settings: EvalSettings,
    scorers: ScorerSet,
) -> EvalResult:
    """Compute every enabled metric for every (model, response) unit.

    Response-level work runs on a bounded worker pool; results merge in
    deterministic (model, prompt) order. Units without a matching prompt
    are ledgered as missing rather than dropped.
    """
    enabled = {m.group for m in metrics_for_groups(settings.metric_groups)}
    out = EvalResult()

    reflection_scorer = None
    featurize = None
    if "reflection" in enabled:
        featurize = make_featurizer(settings, scorers)
        ordered_prompts = [prompts[k] for k in sorted(prompts)]
        triples = build_reflection_training(ordered_prompts, featurize)
        cfg = support.PairLossConfig(
            mu=settings.mu,
            learning_rate=settings.reflection_learning_rate,
            epochs=settings.reflection_epochs,
            seed=settings.reflection_seed,
        )
        reflection_scorer, trace = support.train_reflection_scorer(triples, cfg)
        logger.info("reflection scorer trained: final loss %.4f", trace[-1])

    tasks = []
    for model_id in sorted(responses):
        for unit in responses[model_id]:
            if unit.prompt_id not in prompts:
                for info in metrics_for_groups(settings.metric_groups):
                    out.missing.append(
                        MissingEntry(model_id, info.metric_id, unit.prompt_id, "unknown prompt_id")
                    )
                continue
            tasks.append((unit, prompts[unit.prompt_id]))

    def run(task):
        unit, prompt = task
        return _response_metrics(
            unit, prompt, enabled, scorers, settings, reflection_scorer, featurize
        )

    max_workers = settings.jobs or os.cpu_count() or 4
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(run, tasks))
    for partial in results:
        out.records.extend(partial.records)
        out.missing.extend(partial.missing)

    for model_id in sorted(responses):
        units = [u for u in responses[model_id] if u.prompt_id in prompts]
        if units:
            partial = _corpus_metrics(model_id, units, enabled, scorers, settings)
            out.records.extend(partial.records)
            out.missing.extend(partial.missing)

    out.records.sort(key=lambda r: (r.model_id, r.metric_id, r.unit_id))
    out.missing.sort(key=lambda m: (m.model_id, m.metric_id, m.unit_id))
    return out
