"""Toxicity attribute scoring and aggregation.

The six probabilistic attributes mirror the Perspective-style scorer:
each value estimates the fraction of raters who would flag the text.
Missing scores are excluded from aggregates, never imputed as zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, fields

logger = logging.getLogger(__name__)

TOXICITY_ATTRIBUTES = (
    "toxicity",
    "severe_toxicity",
    "identity_attack",
    "insult",
    "profanity",
    "threat",
)

FLAG_THRESHOLD = 0.5


@dataclass(frozen=True)
class ToxicityScores:
    toxicity: float
    severe_toxicity: float
    identity_attack: float
    insult: float
    profanity: float
    threat: float

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{f.name} out of [0, 1]: {value}")

    def as_dict(self) -> dict[str, float]:
        return {attr: getattr(self, attr) for attr in TOXICITY_ATTRIBUTES}


@dataclass(frozen=True)
class ToxicityAggregate:
    n: int
    means: dict[str, float]
    flagged_fractions: dict[str, float]


def score_toxicity(text: str, client) -> ToxicityScores:
    """One scorer request for *text*; transport, cache and backoff live
    in the client."""
    return client.analyze_toxicity(text)


def aggregate_toxicity(
    scores: list[ToxicityScores], threshold: float = FLAG_THRESHOLD
) -> ToxicityAggregate:
    """Per-attribute arithmetic mean plus the fraction at or above the
    flagging threshold.

    Raises:
        ValueError: for an empty list (callers exclude and count missing
        records before aggregating).
    """
    if not scores:
        raise ValueError("no toxicity scores to aggregate")
    n = len(scores)
    means = {}
    flagged = {}
    for attr in TOXICITY_ATTRIBUTES:
        values = [getattr(s, attr) for s in scores]
        means[attr] = sum(values) / n
        flagged[attr] = sum(1 for v in values if v >= threshold) / n
    return ToxicityAggregate(n=n, means=means, flagged_fractions=flagged)
