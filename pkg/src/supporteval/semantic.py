"""Embedding-based semantic scores: greedy-match token similarity,
learned-regressor passthrough, response-set diversity, and a documented
gendered-co-occurrence bias approximation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np

from .textstats import words

logger = logging.getLogger(__name__)

UNIT_NORM_TOL = 1e-6
DIVERSITY_EPS = 1e-9
BIAS_WINDOW = 10
BIAS_SMOOTHING = 1.0


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Row-per-item embedding matrix; rows unit-normalized when flagged."""

    values: np.ndarray
    unit_norm: bool = False

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError(f"embedding matrix must be 2-D, got shape {self.values.shape}")
        if self.unit_norm and self.rows:
            norms = np.linalg.norm(self.values, axis=1)
            if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
                raise ValueError("unit_norm set but a row norm deviates from 1")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SemanticScores:
    bert_precision: float
    bert_recall: float
    bert_f1: float


@dataclass(frozen=True)
class DiversityScore:
    g: float
    mean_pairwise_similarity: float


def bertscore(cand_tokens: EmbeddingMatrix, ref_tokens: EmbeddingMatrix) -> SemanticScores:
    """Greedy max-cosine matching between token embedding matrices.

    precision averages, over candidate tokens, the best cosine against
    the reference tokens; recall mirrors it; f1 is their harmonic mean
    (0 when both vanish). Requires non-empty unit-normalized inputs of
    equal dimension.
    """
    if cand_tokens.rows == 0 or ref_tokens.rows == 0:
        raise ValueError("bertscore needs non-empty matrices")
    if not (cand_tokens.unit_norm and ref_tokens.unit_norm):
        raise ValueError("bertscore needs unit-normalized matrices")
    if cand_tokens.dim != ref_tokens.dim:
        raise ValueError(f"dimension mismatch: {cand_tokens.dim} vs {ref_tokens.dim}")
    sim = cand_tokens.values @ ref_tokens.values.T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return SemanticScores(bert_precision=precision, bert_recall=recall, bert_f1=f1)


def bleurt_score(candidate: str, reference: str, client) -> float | None:
    """Pass the backend's scalar through unchanged.

    The client owns caching by (candidate, reference); an exhausted
    backend yields None so the metric is recorded as missing, never as
    zero.
    """
    from .clients import BackendUnavailable  # local import avoids a cycle

    try:
        return float(client.score_pair(candidate, reference))
    except BackendUnavailable:
        logger.warning("pair scorer unavailable; marking score missing")
        return None


def genbit_diversity(items: list[str], similarity: Callable[[str, str], float]) -> DiversityScore:
    """Inverse mean pairwise similarity over all ordered pairs i != j.

    A mean at or below 1e-9 yields an infinite sentinel with a warning
    rather than a division blow-up.
    """
    n = len(items)
    if n < 2:
        raise ValueError("diversity needs at least 2 items")
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                total += similarity(items[i], items[j])
    mean = total / (n * (n - 1))
    if mean <= DIVERSITY_EPS:
        logger.warning("mean pairwise similarity %.3g <= eps; diversity is unbounded", mean)
        return DiversityScore(g=math.inf, mean_pairwise_similarity=mean)
    return DiversityScore(g=1.0 / mean, mean_pairwise_similarity=mean)


def cosine_similarity_fn(client) -> Callable[[str, str], float]:
    """Pair similarity from whole-text embeddings (cached by the client)."""

    def sim(a: str, b: str) -> float:
        matrix = client.embed([a, b])
        return float(matrix.values[0] @ matrix.values[1])

    return sim


def shifted_cosine_similarity_fn(client) -> Callable[[str, str], float]:
    """Cosine mapped to [0, 1]; keeps the diversity mean positive."""
    raw = cosine_similarity_fn(client)

    def sim(a: str, b: str) -> float:
        return (1.0 + raw(a, b)) / 2.0

    return sim


@dataclass(frozen=True)
class GenderedLexicon:
    male: frozenset[str]
    female: frozenset[str]

    def __post_init__(self) -> None:
        if not self.male or not self.female:
            raise ValueError("lexicon needs non-empty male and female lists")


def load_gendered_lexicon(path: str | None = None) -> GenderedLexicon:
    """Two-section word list: ``[male]`` and ``[female]`` headers, one
    word per line, '#' comments allowed."""
    if path is None:
        text = resources.files("supporteval").joinpath("data/gendered_lexicon.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    sections: dict[str, set[str]] = {"male": set(), "female": set()}
    current: str | None = None
    for line in text.splitlines():
        line = line.strip().lower()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            if current not in sections:
                raise ValueError(f"unknown lexicon section: {current}")
            continue
        if current is None:
            raise ValueError("lexicon word before any section header")
        sections[current].add(line)
    return GenderedLexicon(male=frozenset(sections["male"]), female=frozenset(sections["female"]))


def gender_bias_abcas(
    corpus: list[str],
    lexicon: GenderedLexicon,
    window: int = BIAS_WINDOW,
    smoothing: float = BIAS_SMOOTHING,
) -> float:
    """Mean absolute log-ratio of gendered co-occurrence counts.

    This approximates the gendered-bias score: for every non-gendered
    token that appears within *window* positions of a gendered token,
    b(w) = |log((c(w, male) + s) / (c(w, female) + s))|, averaged over
    qualifying tokens. It is an approximation and is labeled as such in
    reports.

    Raises:
        ValueError: when no token co-occurs with any gendered token.
    """
    male_counts: dict[str, int] = {}
    female_counts: dict[str, int] = {}
    for text in corpus:
        tokens = [w.lower() for w in words(text)]
        male_pos = [i for i, t in enumerate(tokens) if t in lexicon.male]
        female_pos = [i for i, t in enumerate(tokens) if t in lexicon.female]
        if not male_pos and not female_pos:
            continue
        for i, tok in enumerate(tokens):
            if tok in lexicon.male or tok in lexicon.female:
                continue
            m = sum(1 for j in male_pos if abs(i - j) <= window)
            f = sum(1 for j in female_pos if abs(i - j) <= window)
            if m or f:
                male_counts[tok] = male_counts.get(tok, 0) + m
                female_counts[tok] = female_counts.get(tok, 0) + f
    qualifying = sorted(set(male_counts) | set(female_counts))
    if not qualifying:
        raise ValueError("insufficient gendered context")
    total = sum(
        abs(math.log((male_counts.get(w, 0) + smoothing) / (female_counts.get(w, 0) + smoothing)))
        for w in qualifying
    )
    return total / len(qualifying)
