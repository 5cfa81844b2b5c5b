"""N-gram and longest-common-subsequence overlap scores (ROUGE-1/2/L).

Tokens are lowercased words under the textstats word rule; no stemming.
Repeated n-grams use multiset clipping, the standard ROUGE semantics.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .textstats import words


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class OverlapScores:
    rouge1: PRF
    rouge2: PRF
    rougeL: PRF


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens of *text*."""
    return [w.lower() for w in words(text)]


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _prf(match: int, cand_total: int, ref_total: int) -> PRF:
    precision = match / cand_total if cand_total > 0 else 0.0
    recall = match / ref_total  # caller guarantees ref_total > 0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return PRF(precision=precision, recall=recall, f1=f1)


def rouge_n(candidate: list[str], reference: list[str], n: int) -> PRF:
    """Clipped n-gram overlap between token lists.

    Raises:
        ValueError: if n < 1 or the reference has no n-grams.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cand_grams = _ngrams(candidate, n)
    ref_grams = _ngrams(reference, n)
    ref_total = sum(ref_grams.values())
    if ref_total == 0:
        raise ValueError(f"no reference n-grams for n={n}")
    match = sum(min(c, ref_grams[g]) for g, c in cand_grams.items() if g in ref_grams)
    return _prf(match, sum(cand_grams.values()), ref_total)


def lcs_length(a: list[str], b: list[str]) -> int:
    """Length of the longest common subsequence, O(len(a)*len(b))."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> PRF:
    """LCS-based overlap between token lists.

    Raises:
        ValueError: if either token list is empty.
    """
    if not candidate or not reference:
        raise ValueError("rouge_l needs non-empty candidate and reference")
    lcs = lcs_length(candidate, reference)
    return _prf(lcs, len(candidate), len(reference))


def score_pair(candidate_text: str, reference_text: str) -> OverlapScores:
    """ROUGE-1/2/L for a candidate/reference text pair."""
    cand = tokenize(candidate_text)
    ref = tokenize(reference_text)
    return OverlapScores(
        rouge1=rouge_n(cand, ref, 1),
        rouge2=rouge_n(cand, ref, 2),
        rougeL=rouge_l(cand, ref),
    )
