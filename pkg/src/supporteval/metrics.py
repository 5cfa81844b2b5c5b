"""Registry of metric ids: display names, orientations, and the groups
the run config can enable."""

from __future__ import annotations

from dataclasses import dataclass

from .stats import HIGHER_BETTER, LOWER_BETTER


@dataclass(frozen=True)
class MetricInfo:
    metric_id: str
    display_name: str
    orientation: str
    group: str


_ALL = [
    MetricInfo("fkg", "FKG", LOWER_BETTER, "readability"),
    MetricInfo("gfi", "GFI", LOWER_BETTER, "readability"),
    MetricInfo("smog", "SMOG", LOWER_BETTER, "readability"),
    MetricInfo("ari", "ARI", LOWER_BETTER, "readability"),
    MetricInfo("cli", "CLI", LOWER_BETTER, "readability"),
    MetricInfo("c_v", "C_v", HIGHER_BETTER, "coherence"),
    MetricInfo("c_npmi", "C_npmi", HIGHER_BETTER, "coherence"),
    MetricInfo("rouge1", "Rouge-1", HIGHER_BETTER, "rouge"),
    MetricInfo("rouge2", "Rouge-2", HIGHER_BETTER, "rouge"),
    MetricInfo("rougeL", "Rouge-L", HIGHER_BETTER, "rouge"),
    MetricInfo("bleurt", "BLEURT", HIGHER_BETTER, "bleurt"),
    MetricInfo("bert_precision", "BERT Precision", HIGHER_BETTER, "bertscore"),
    MetricInfo("bert_recall", "BERT Recall", HIGHER_BETTER, "bertscore"),
    MetricInfo("bert_f1", "BERT F1", HIGHER_BETTER, "bertscore"),
    MetricInfo("toxicity", "Toxicity", LOWER_BETTER, "toxicity"),
    MetricInfo("severe_toxicity", "Severe Toxicity", LOWER_BETTER, "toxicity"),
    MetricInfo("identity_attack", "Identity Attack", LOWER_BETTER, "toxicity"),
    MetricInfo("insult", "Insult", LOWER_BETTER, "toxicity"),
    MetricInfo("profanity", "Profanity", LOWER_BETTER, "toxicity"),
    MetricInfo("threat", "Threat", LOWER_BETTER, "toxicity"),
    MetricInfo("genbit_diversity", "GenBit Diversity", HIGHER_BETTER, "genbit"),
    MetricInfo("gender_bias_abcas", "Gender Bias (ABCAS approx.)", LOWER_BETTER, "gender_bias"),
    MetricInfo("interpretation", "Interpretation", HIGHER_BETTER, "empathy"),
    MetricInfo("emotional_reaction", "Emotional Reaction", HIGHER_BETTER, "empathy"),
    MetricInfo("exploration", "Exploration", HIGHER_BETTER, "empathy"),
    MetricInfo("reflection", "Reflection", HIGHER_BETTER, "reflection"),
]

REGISTRY: dict[str, MetricInfo] = {m.metric_id: m for m in _ALL}
GROUPS: tuple[str, ...] = tuple(dict.fromkeys(m.group for m in _ALL))


def metrics_for_groups(groups: list[str]) -> list[MetricInfo]:
    unknown = set(groups) - set(GROUPS)
    if unknown:
        raise ValueError(f"unknown metric groups: {sorted(unknown)}")
    wanted = set(groups)
    return [m for m in _ALL if m.group in wanted]


def orientation_of(metric_id: str) -> str:
    if metric_id not in REGISTRY:
        raise ValueError(f"unknown metric id: {metric_id}")
    return REGISTRY[metric_id].orientation
