"""Corpus curation: ingest raw post/comment dumps, filter, pair, split
and export.

Input dumps are JSON-lines records (unknown fields ignored). A post
survives filtering when it is not deleted, has a non-empty title, and
has at least one comment from another author scored strictly greater
than four. Each surviving post yields one prompt-response pair: the
prompt is title + blank line + body, the response is the top-scored
eligible comment (ties broken by earliest timestamp, then id).

The split shuffle uses a counter-based Philox generator keyed by the
configured 64-bit seed, so splits agree bit-for-bit across platforms.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

logger = logging.getLogger(__name__)

SCORE_THRESHOLD = 4  # strictly greater than this qualifies
PERSONA_TEMPLATE = "You are a {label}. "


@dataclass(frozen=True)
class RawPost:
    id: str
    title: str | None
    body: str
    author: str
    deleted: bool
    created_at: int

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("post id must be non-empty")
        if self.created_at < 0:
            raise ValueError(f"post {self.id}: created_at must be >= 0")


@dataclass(frozen=True)
class RawComment:
    id: str
    post_id: str
    author: str
    body: str
    score: int
    created_at: int

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("comment id must be non-empty")
        if self.created_at < 0:
            raise ValueError(f"comment {self.id}: created_at must be >= 0")


@dataclass(frozen=True)
class PromptResponsePair:
    prompt_id: str
    prompt_text: str
    response_text: str
    response_score: int

    def __post_init__(self) -> None:
        if not self.prompt_text:
            raise ValueError("prompt_text must be non-empty")
        if self.response_score <= SCORE_THRESHOLD:
            raise ValueError(f"response_score must be > {SCORE_THRESHOLD}")


@dataclass(frozen=True)
class SplitSpec:
    train_count: int
    test_count: int
    seed: int

    def __post_init__(self) -> None:
        if self.train_count < 0 or self.test_count < 0:
            raise ValueError("split counts must be non-negative")


@dataclass(frozen=True)
class SplitManifest:
    seed: int
    train_count: int
    test_count: int
    discarded: int


@dataclass(frozen=True)
class PersonaVariant:
    base_prompt_id: str
    persona_label: str
    variant_text: str


@dataclass
class CorpusStore:
    """Parsed dump contents plus ingest bookkeeping. Treated as an
    immutable snapshot once built; filters return new stores."""

    posts: dict[str, RawPost] = field(default_factory=dict)
    comments_by_post: dict[str, list[RawComment]] = field(default_factory=dict)
    quarantined_comments: list[RawComment] = field(default_factory=list)
    malformed_posts: int = 0
    malformed_comments: int = 0

    @property
    def post_count(self) -> int:
        return len(self.posts)

    @property
    def comment_count(self) -> int:
        return sum(len(c) for c in self.comments_by_post.values())


def _parse_post(record: dict) -> RawPost:
    return RawPost(
        id=str(record["id"]),
        title=None if record.get("title") is None else str(record["title"]),
        body=str(record.get("body", "")),
        author=str(record["author"]),
        deleted=bool(record.get("deleted", False)),
        created_at=int(record["created_at"]),
    )


def _parse_comment(record: dict) -> RawComment:
    return RawComment(
        id=str(record["id"]),
        post_id=str(record["post_id"]),
        author=str(record["author"]),
        body=str(record.get("body", "")),
        score=int(record["score"]),
        created_at=int(record["created_at"]),
    )


def parse_dump(post_stream: Iterable[str] | IO[str], comment_stream: Iterable[str] | IO[str]) -> CorpusStore:
    """Build a CorpusStore from two JSON-lines streams.

    Malformed lines are skipped and counted per stream; comments whose
    post_id is unknown are quarantined (counted, not silently dropped).
    """
    store = CorpusStore()
    for line_no, line in enumerate(post_stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            post = _parse_post(json.loads(line))
        except (ValueError, KeyError, TypeError) as exc:
            store.malformed_posts += 1
            logger.debug("skipping malformed post line %d: %s", line_no, exc)
            continue
        store.posts[post.id] = post
    for line_no, line in enumerate(comment_stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            comment = _parse_comment(json.loads(line))
        except (ValueError, KeyError, TypeError) as exc:
            store.malformed_comments += 1
            logger.debug("skipping malformed comment line %d: %s", line_no, exc)
            continue
        if comment.post_id in store.posts:
            store.comments_by_post.setdefault(comment.post_id, []).append(comment)
        else:
            store.quarantined_comments.append(comment)
    return store


def parse_dump_files(posts_path: str, comments_path: str) -> CorpusStore:
    with open(posts_path, encoding="utf-8") as posts, open(comments_path, encoding="utf-8") as comments:
        return parse_dump(posts, comments)


def _eligible_comments(post: RawPost, comments: list[RawComment]) -> list[RawComment]:
    # self-comments are matched by exact (case-sensitive) author string
    return [c for c in comments if c.author != post.author and c.score > SCORE_THRESHOLD]


def filter_posts(store: CorpusStore) -> CorpusStore:
    """Keep posts that are not deleted, have a non-empty title, and have
    at least one eligible comment (other author, score > 4)."""
    kept = CorpusStore(
        quarantined_comments=list(store.quarantined_comments),
        malformed_posts=store.malformed_posts,
        malformed_comments=store.malformed_comments,
    )
    for post_id, post in store.posts.items():
        if post.deleted:
            continue
        if post.title is None or not post.title.strip():
            continue
        comments = store.comments_by_post.get(post_id, [])
        if not _eligible_comments(post, comments):
            continue
        kept.posts[post_id] = post
        kept.comments_by_post[post_id] = list(comments)
    return kept


def prompt_text_for(post: RawPost) -> str:
    return f"{post.title}\n\n{post.body}"


def build_pairs(store: CorpusStore) -> list[PromptResponsePair]:
    """One pair per surviving post: prompt = title + blank line + body,
    response = highest-scored eligible comment (earliest timestamp, then
    id, breaks ties)."""
    pairs = []
    for post_id in sorted(store.posts):
        post = store.posts[post_id]
        eligible = _eligible_comments(post, store.comments_by_post.get(post_id, []))
        if not eligible:
            continue
        best = min(eligible, key=lambda c: (-c.score, c.created_at, c.id))
        pairs.append(
            PromptResponsePair(
                prompt_id=post_id,
                prompt_text=prompt_text_for(post),
                response_text=best.body,
                response_score=best.score,
            )
        )
    return pairs


def split(
    pairs: list[PromptResponsePair], spec: SplitSpec
) -> tuple[list[PromptResponsePair], list[PromptResponsePair], SplitManifest]:
    """Seeded-shuffle partition into train/test; the surplus is discarded
    and reported in the manifest.

    Raises:
        ValueError: when train + test exceeds the available pair count.
    """
    total = len(pairs)
    if spec.train_count + spec.test_count > total:
        raise ValueError(
            f"infeasible split: train {spec.train_count} + test {spec.test_count} "
            f"> available {total}"
        )
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    order = rng.permutation(total)
    shuffled = [pairs[i] for i in order]
    train = shuffled[: spec.train_count]
    test = shuffled[spec.train_count : spec.train_count + spec.test_count]
    discarded = total - spec.train_count - spec.test_count
    if discarded:
        logger.info("discarding %d surplus pairs after split", discarded)
    manifest = SplitManifest(
        seed=spec.seed,
        train_count=spec.train_count,
        test_count=spec.test_count,
        discarded=discarded,
    )
    return train, test, manifest


def export_training(pairs: list[PromptResponsePair], fh: IO[str]) -> int:
    """Write JSON-lines {prompt, completion} records; returns line count."""
    if not pairs:
        raise ValueError("no pairs to export")
    n = 0
    for pair in pairs:
        fh.write(
            json.dumps(
                {
                    "prompt_id": pair.prompt_id,
                    "prompt": pair.prompt_text,
                    "completion": pair.response_text,
                    "response_score": pair.response_score,
                },
                ensure_ascii=False,
                sort_keys=True,
            )
        )
        fh.write("\n")
        n += 1
    return n


def load_training(fh: IO[str]) -> list[PromptResponsePair]:
    """Inverse of export_training; round-trips losslessly."""
    pairs = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        pairs.append(
            PromptResponsePair(
                prompt_id=record["prompt_id"],
                prompt_text=record["prompt"],
                response_text=record["completion"],
                response_score=int(record["response_score"]),
            )
        )
    return pairs


def make_persona_variants(prompt_id: str, prompt_text: str, personas: list[str]) -> list[PersonaVariant]:
    """One variant per persona label; the original prompt is kept
    verbatim as the suffix of each variant."""
    return [
        PersonaVariant(
            base_prompt_id=prompt_id,
            persona_label=label,
            variant_text=f"{PERSONA_TEMPLATE.format(label=label)}{prompt_text}",
        )
        for label in personas
    ]
