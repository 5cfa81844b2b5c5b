"""Supportiveness metrics: empathy judging via a prompted evaluator, and
margin-ranking reflection scoring with a small trainable linear scorer.

The empathy rubric rates interpretation, emotional reaction and
exploration on a 0-2 scale; the judge reply must carry a
``<t1> ... </t1>`` block with the three labeled integers. Reflection
quality uses a two-part margin ranking loss over complex/simple/non-
reflection response tiers plus mismatched-pair penalties.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass
from importlib import resources

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 0.3
RETRY_SUFFIX = "Respond only in the required format."
HASH_FEATURE_DIM = 256

_EMPATHY_BLOCK_RE = re.compile(r"<t1>(.*?)</t1>", re.DOTALL)
_SCORE_RE = re.compile(
    r"Interpretation\s*:\s*(-?\d+)\s*,\s*Emotional\s+Reaction\s*:\s*(-?\d+)\s*,\s*Exploration\s*:\s*(-?\d+)",
    re.IGNORECASE,
)


class EmpathyParseError(ValueError):
    """Judge reply did not contain a valid score block; carries the raw reply."""

    def __init__(self, message: str, reply: str) -> None:
        super().__init__(message)
        self.reply = reply


@dataclass(frozen=True)
class EmpathyScores:
    interpretation: int
    emotional_reaction: int
    exploration: int

    def __post_init__(self) -> None:
        for name, value in (
            ("interpretation", self.interpretation),
            ("emotional_reaction", self.emotional_reaction),
            ("exploration", self.exploration),
        ):
            if value not in (0, 1, 2):
                raise ValueError(f"{name} out of range 0-2: {value}")


def _load_template() -> str:
    return resources.files("supporteval").joinpath("data/empathy_prompt.txt").read_text("utf-8")


_TEMPLATE_CACHE: str | None = None


def empathy_prompt_template() -> str:
    global _TEMPLATE_CACHE
    if _TEMPLATE_CACHE is None:
        _TEMPLATE_CACHE = _load_template()
    return _TEMPLATE_CACHE


def build_empathy_prompt(seeker_post: str, response: str) -> str:
    """Judge prompt: the versioned rubric template plus the conversation.

    Byte-identical output for identical inputs; the template file is the
    fixture of record.
    """
    if not seeker_post or not response:
        raise ValueError("seeker post and response must be non-empty")
    template = empathy_prompt_template()
    return (
        f"{template}\n"
        f"Conversation to evaluate:\n"
        f"Seeker post:\n{seeker_post}\n\n"
        f"Supporter response:\n{response}\n"
    )


def parse_empathy(judge_reply: str) -> EmpathyScores:
    """Extract the first ``<t1>...</t1>`` block and its three integers.

    Whitespace-tolerant. Raises EmpathyParseError (carrying the reply)
    for a missing block, unparseable labels, or out-of-range values.
    """
    block = _EMPATHY_BLOCK_RE.search(judge_reply)
    if block is None:
        raise EmpathyParseError("no <t1>...</t1> block in judge reply", judge_reply)
    scores = _SCORE_RE.search(block.group(1))
    if scores is None:
        raise EmpathyParseError("score labels not found in <t1> block", judge_reply)
    values = tuple(int(g) for g in scores.groups())
    if any(v not in (0, 1, 2) for v in values):
        raise EmpathyParseError(f"score out of range 0-2: {values}", judge_reply)
    return EmpathyScores(*values)


def format_empathy_reply(scores: EmpathyScores) -> str:
    """Inverse of parse_empathy for valid score triples."""
    return (
        f"<t1> Interpretation: {scores.interpretation}, "
        f"Emotional Reaction: {scores.emotional_reaction}, "
        f"Exploration: {scores.exploration} </t1>"
    )


def judge_empathy(seeker_post: str, response: str, client) -> EmpathyScores | None:
    """One judge call; a non-parsing reply is retried once with a format
    reminder, then marked missing (None)."""
    prompt = build_empathy_prompt(seeker_post, response)
    for attempt_prompt in (prompt, f"{prompt}\n{RETRY_SUFFIX}"):
        try:
            return parse_empathy(client.complete(attempt_prompt))
        except EmpathyParseError as exc:
            logger.warning("unparseable judge reply: %s", str(exc))
    return None


def pair_gap_loss(s_cr: float, s_sr: float, s_nr: float, mu: float = DEFAULT_MARGIN) -> float:
    """Multi-level margin ranking loss over the three response tiers:
    max(0, mu - (s_cr - s_sr)) + max(0, mu - (s_sr - s_nr))
    + max(0, 2*mu - (s_cr - s_nr)).
    """
    if mu <= 0:
        raise ValueError(f"margin must be positive, got {mu}")
    return (
        max(0.0, mu - (s_cr - s_sr))
        + max(0.0, mu - (s_sr - s_nr))
        + max(0.0, 2 * mu - (s_cr - s_nr))
    )


def pair_prompt_loss(
    s_cr: float, s_mcr: float, s_sr: float, s_msr: float, mu: float = DEFAULT_MARGIN
) -> float:
    """Prompt-aware margin ranking loss penalizing mismatched pairs:
    max(0, 2*mu - (s_cr - s_mcr)) + max(0, mu - (s_sr - s_msr)).
    """
    if mu <= 0:
        raise ValueError(f"margin must be positive, got {mu}")
    return max(0.0, 2 * mu - (s_cr - s_mcr)) + max(0.0, mu - (s_sr - s_msr))


@dataclass(frozen=True)
class ReflectionTriple:
    """Feature vectors for one training instance: the prompt, its three
    response tiers, and two responses mismatched from other prompts."""

    prompt_features: np.ndarray
    cr_features: np.ndarray
    sr_features: np.ndarray
    nr_features: np.ndarray
    mismatched_cr_features: np.ndarray
    mismatched_sr_features: np.ndarray

    def __post_init__(self) -> None:
        dims = {
            v.shape
            for v in (
                self.prompt_features,
                self.cr_features,
                self.sr_features,
                self.nr_features,
                self.mismatched_cr_features,
                self.mismatched_sr_features,
            )
        }
        if len(dims) != 1 or len(next(iter(dims))) != 1:
            raise ValueError("all feature vectors must share one 1-D shape")


@dataclass(frozen=True)
class PairLossConfig:
    mu: float = DEFAULT_MARGIN
    learning_rate: float = 0.5
    epochs: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass
class ReflectionScorer:
    """Linear scorer over [p, r, p*r] features, squashed to [0, 1]."""

    weights: np.ndarray
    bias: float

    def score(self, prompt_features: np.ndarray, response_features: np.ndarray) -> float:
        phi = _interaction_features(prompt_features, response_features)
        if phi.shape != self.weights.shape:
            raise ValueError(f"feature dimension {phi.shape} != weights {self.weights.shape}")
        return float(_sigmoid(self.weights @ phi + self.bias))


def _interaction_features(p: np.ndarray, r: np.ndarray) -> np.ndarray:
    if p.shape != r.shape:
        raise ValueError(f"prompt/response dimension mismatch: {p.shape} vs {r.shape}")
    return np.concatenate([p, r, p * r])


def _sigmoid(z: float | np.ndarray):
    return 1.0 / (1.0 + np.exp(-z))


def reflection_score(
    scorer: ReflectionScorer, prompt_features: np.ndarray, response_features: np.ndarray
) -> float:
    return scorer.score(prompt_features, response_features)


def _triple_loss_and_grad(
    scorer: ReflectionScorer, triple: ReflectionTriple, mu: float
) -> tuple[float, np.ndarray, float]:
    """Loss plus subgradient for one triple.

    Hinge terms use the strict subgradient (active only when the slack
    is positive); at a kink the zero branch is taken.
    """
    responses = {
        "cr": triple.cr_features,
        "sr": triple.sr_features,
        "nr": triple.nr_features,
        "mcr": triple.mismatched_cr_features,
        "msr": triple.mismatched_sr_features,
    }
    phi = {name: _interaction_features(triple.prompt_features, r) for name, r in responses.items()}
    z = {name: float(scorer.weights @ f + scorer.bias) for name, f in phi.items()}
    s = {name: float(_sigmoid(v)) for name, v in z.items()}

    hinges = [
        (mu, "cr", "sr"),
        (mu, "sr", "nr"),
        (2 * mu, "cr", "nr"),
        (2 * mu, "cr", "mcr"),
        (mu, "sr", "msr"),
    ]
    loss = 0.0
    grad_w = np.zeros_like(scorer.weights)
    grad_b = 0.0
    for margin, hi, lo in hinges:
        slack = margin - (s[hi] - s[lo])
        if slack > 0.0:
            loss += slack
            # d slack / d score: -1 for the high tier, +1 for the low tier
            dhi = s[hi] * (1.0 - s[hi])
            dlo = s[lo] * (1.0 - s[lo])
            grad_w += -dhi * phi[hi] + dlo * phi[lo]
            grad_b += -dhi + dlo
    return loss, grad_w, grad_b


def reflection_loss(scorer: ReflectionScorer, triple: ReflectionTriple, mu: float = DEFAULT_MARGIN) -> float:
    """Combined loss L_gap + L_prompt for one triple under *scorer*."""
    loss, _, _ = _triple_loss_and_grad(scorer, triple, mu)
    return loss


def train_reflection_scorer(
    triples: list[ReflectionTriple],
    cfg: PairLossConfig,
    init: ReflectionScorer | None = None,
) -> tuple[ReflectionScorer, list[float]]:
    """Full-batch subgradient descent on the mean combined loss.

    Deterministic given cfg.seed (small random init, fixed step size);
    pass *init* to warm-start from known weights instead. Returns the
    trained scorer and the per-epoch loss trace; the trace is recorded,
    not guaranteed monotone.
    """
    if not triples:
        raise ValueError("need at least one training triple")
    dim = triples[0].prompt_features.shape[0]
    for t in triples:
        if t.prompt_features.shape[0] != dim:
            raise ValueError("inconsistent feature dimensions across triples")
    if init is not None:
        scorer = ReflectionScorer(weights=init.weights.copy(), bias=init.bias)
    else:
        rng = np.random.Generator(np.random.Philox(key=cfg.seed))
        scorer = ReflectionScorer(weights=rng.normal(0.0, 0.01, size=3 * dim), bias=0.0)
    trace: list[float] = []
    for _ in range(cfg.epochs):
        total = 0.0
        grad_w = np.zeros_like(scorer.weights)
        grad_b = 0.0
        for triple in triples:
            loss, gw, gb = _triple_loss_and_grad(scorer, triple, cfg.mu)
            total += loss
            grad_w += gw
            grad_b += gb
        mean_loss = total / len(triples)
        if not np.isfinite(mean_loss):
            raise ValueError("non-finite training loss")
        trace.append(mean_loss)
        scorer = ReflectionScorer(
            weights=scorer.weights - cfg.learning_rate * grad_w / len(triples),
            bias=scorer.bias - cfg.learning_rate * grad_b / len(triples),
        )
    return scorer, trace


def hashed_features(text: str, dim: int = HASH_FEATURE_DIM) -> np.ndarray:
    """Deterministic signed bag-of-words hashing, L2-normalized.

    Fallback feature source when no embedding backend is configured.
    """
    from .textstats import words

    vec = np.zeros(dim)
    for token in (w.lower() for w in words(text)):
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        index = int.from_bytes(digest[:4], "big") % dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        vec[index] += sign
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec
