"""Topic coherence from boolean sliding-window co-occurrence counts.

Windows are boolean: within one window a word or word pair is counted at
most once. A document of length L contributes max(1, L - window + 1)
windows. NPMI uses an epsilon inside both logarithms so unseen pairs stay
finite; results are clipped to the defining bounds. C_v uses one-set
segmentation: each topic word's NPMI vector against the full topic is
compared (cosine) with the element-wise sum vector of the whole set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations

import numpy as np

DEFAULT_WINDOW_SIZE = 110
DEFAULT_EPSILON = 1e-12


@dataclass
class CooccurrenceStats:
    window_size: int
    total_windows: int = 0
    word_counts: dict[str, int] = field(default_factory=dict)
    pair_counts: dict[frozenset, int] = field(default_factory=dict)

    def probability(self, word: str) -> float:
        if word not in self.word_counts:
            raise ValueError(f"unknown word: {word!r}")
        return self.word_counts[word] / self.total_windows

    def joint_probability(self, w1: str, w2: str) -> float:
        if w1 not in self.word_counts:
            raise ValueError(f"unknown word: {w1!r}")
        if w2 not in self.word_counts:
            raise ValueError(f"unknown word: {w2!r}")
        if w1 == w2:
            # a word trivially co-occurs with itself wherever it appears
            return self.word_counts[w1] / self.total_windows
        return self.pair_counts.get(frozenset((w1, w2)), 0) / self.total_windows


@dataclass(frozen=True)
class TopicWordSet:
    topic_id: int
    words: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.words) < 2:
            raise ValueError("a topic needs at least 2 words")
        if len(set(self.words)) != len(self.words):
            raise ValueError("topic words must be distinct")


@dataclass(frozen=True)
class CoherenceScores:
    c_v: float
    c_npmi: float


def build_cooccurrence(docs: list[list[str]], window_size: int = DEFAULT_WINDOW_SIZE) -> CooccurrenceStats:
    """Boolean sliding-window counts over a tokenized corpus.

    Raises:
        ValueError: for window_size < 2 or an empty corpus.
    """
    if window_size < 2:
        raise ValueError(f"window_size must be >= 2, got {window_size}")
    if not docs:
        raise ValueError("empty corpus")
    stats = CooccurrenceStats(window_size=window_size)
    for doc in docs:
        n_windows = max(1, len(doc) - window_size + 1)
        for start in range(n_windows):
            seen = sorted(set(doc[start : start + window_size]))
            for w in seen:
                stats.word_counts[w] = stats.word_counts.get(w, 0) + 1
            for a, b in combinations(seen, 2):
                key = frozenset((a, b))
                stats.pair_counts[key] = stats.pair_counts.get(key, 0) + 1
        stats.total_windows += n_windows
    return stats


def npmi(stats: CooccurrenceStats, w1: str, w2: str, epsilon: float = DEFAULT_EPSILON) -> float:
    """Normalized pointwise mutual information of a word pair, in [-1, 1].

    log((p12 + eps) / (p1 * p2)) / (-log(p12 + eps)), clipped to the
    defining bounds (the epsilon guard can push the raw ratio past them
    by a few ulps). The degenerate case p12 = 1 is defined as 1.
    """
    p1 = stats.probability(w1)
    p2 = stats.probability(w2)
    p12 = stats.joint_probability(w1, w2)
    if p12 >= 1.0:
        return 1.0
    value = math.log((p12 + epsilon) / (p1 * p2)) / -math.log(p12 + epsilon)
    return min(1.0, max(-1.0, value))


def coherence_cnpmi(topic: TopicWordSet, stats: CooccurrenceStats, epsilon: float = DEFAULT_EPSILON) -> float:
    """Mean NPMI over all unordered word pairs of the topic."""
    pairs = list(combinations(topic.words, 2))
    return sum(npmi(stats, a, b, epsilon) for a, b in pairs) / len(pairs)


def coherence_cv(topic: TopicWordSet, stats: CooccurrenceStats, epsilon: float = DEFAULT_EPSILON) -> float:
    """One-set segmentation C_v of the topic, clipped into [0, 1].

    Each word's vector holds its NPMI against every topic word (self
    included); the score is the mean cosine between those vectors and
    their element-wise sum. An all-zero vector contributes cosine 0.
    """
    n = len(topic.words)
    mat = np.empty((n, n))
    for i, a in enumerate(topic.words):
        for j, b in enumerate(topic.words):
            mat[i, j] = npmi(stats, a, b, epsilon) if j >= i else mat[j, i]
    total = mat.sum(axis=0)
    total_norm = np.linalg.norm(total)
    cosines = []
    for i in range(n):
        row_norm = np.linalg.norm(mat[i])
        if row_norm == 0.0 or total_norm == 0.0:
            cosines.append(0.0)
        else:
            cosines.append(float(mat[i] @ total / (row_norm * total_norm)))
    return min(1.0, max(0.0, float(np.mean(cosines))))


def score_topics(topics: list[TopicWordSet], stats: CooccurrenceStats) -> list[CoherenceScores]:
    return [
        CoherenceScores(c_v=coherence_cv(t, stats), c_npmi=coherence_cnpmi(t, stats))
        for t in topics
    ]


def load_stopwords(path: str | None = None) -> frozenset[str]:
    """Stop-word list, one word per line; blank lines and '#' comments skipped."""
    if path is None:
        text = resources.files("supporteval").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def extract_topics(
    responses: list[list[str]],
    k: int,
    n: int,
    stats: CooccurrenceStats | None = None,
    stopwords: frozenset[str] | None = None,
) -> list[TopicWordSet]:
    """Deterministic frequency-based topics: corpus TF-IDF ranking cut into K blocks of N.

    This is a documented approximation standing in for a topic model:
    content words (alphabetic, not stop-words, and known to *stats* when
    given) are ranked by total term frequency times smoothed IDF, ties
    broken alphabetically, and the top K*N words are partitioned in rank
    order.

    Raises:
        ValueError: if the eligible vocabulary is smaller than K*N.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if stopwords is None:
        stopwords = load_stopwords()
    n_docs = len(responses)
    tf: dict[str, int] = {}
    df: dict[str, int] = {}
    for doc in responses:
        for w in doc:
            tf[w] = tf.get(w, 0) + 1
        for w in set(doc):
            df[w] = df.get(w, 0) + 1

    def eligible(w: str) -> bool:
        if not w.isalpha() or w.lower() in stopwords:
            return False
        return stats is None or w in stats.word_counts

    scored = [
        (tf[w] * (math.log((1 + n_docs) / (1 + df[w])) + 1.0), w)
        for w in tf
        if eligible(w)
    ]
    scored.sort(key=lambda item: (-item[0], item[1]))
    if len(scored) < k * n:
        raise ValueError(
            f"vocabulary too small: need {k * n} content words, have {len(scored)}"
        )
    ranked = [w for _, w in scored[: k * n]]
    return [
        TopicWordSet(topic_id=i, words=tuple(ranked[i * n : (i + 1) * n]))
        for i in range(k)
    ]
