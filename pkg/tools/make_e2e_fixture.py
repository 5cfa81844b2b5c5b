#!/usr/bin/env python3
"""Generate the end-to-end fixture corpus: a small synthetic dump, four
model response files with distinct writing styles, and the run config.

Everything is derived from fixed Philox streams so the fixture (and the
golden report built from it) is reproducible bit-for-bit. Model styles
differ in sentence length and vocabulary complexity so readability
separates cleanly, while hash-driven mock scorers supply the rest of
the variation.
"""

from __future__ import annotations

import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from supporteval import corpus  # noqa: E402

FIXTURE_SEED = 424242
TRAIN_COUNT = 18
TEST_COUNT = 10
N_POSTS = 40

TITLES = [
    "Heart races every night",
    "Cannot stop worrying about work",
    "Panic on the train again",
    "Afraid to call the clinic",
    "Sleep keeps slipping away",
    "Morning dread will not fade",
    "Overthinking every conversation",
    "Chest feels tight before meetings",
    "Exams are crushing me",
    "New city, no friends yet",
]

BODY_SENTENCES = [
    "It starts right after dinner and builds until midnight.",
    "I keep replaying small mistakes from years ago.",
    "My hands shake and I lose track of what people say.",
    "Everyone tells me to relax but that makes it worse.",
    "I tried an app for breathing but gave up after a week.",
    "Some days are fine and then one email ruins everything.",
    "I have not told my family how bad it gets.",
    "Walking helps a little but the worry comes back.",
    "Caffeine makes it worse and I still cannot quit.",
    "I just want one normal evening without the spiral.",
]

COMMENT_SENTENCES = [
    "What helped me was naming the worry out loud and writing it down.",
    "A counselor taught me box breathing and it slowly became automatic.",
    "Try keeping the phone outside the bedroom for a week.",
    "You are not broken, the body just learned an alarm too well.",
    "Small walks after lunch gave me back some quiet.",
    "I split big tasks into ten minute pieces and the dread shrank.",
    "Talking to my doctor was easier than the waiting made it seem.",
    "A warm shower and a boring book beat doom scrolling for me.",
    "Cutting the afternoon coffee changed my nights completely.",
    "Progress was slow and uneven, but it was still progress.",
]

SIMPLE_WORDS = (
    "you can rest try slow deep breaths walk talk it helps be kind to your mind "
    "sleep will come take small steps drink water sit calm night day friend call"
).split()

COMPLEX_WORDS = (
    "overwhelming physiological rumination catastrophizing hypervigilance breathing "
    "meditation psychologist appointment strategies gradually considerable reassurance "
    "perspective gratitude relaxation technique counselor journaling desensitization"
).split()

GENDERED_PHRASES = [
    "my brother said it helps",
    "her mom tried it too",
    "his doctor suggested it",
    "my sister felt the same",
]

STYLES = {
    # (sentence_len_range, sentences_range, complex_fraction)
    "alpha-ft": ((3, 6), (3, 5), 0.05),
    "alpha": ((8, 13), (3, 5), 0.25),
    "bravo-ft": ((6, 10), (3, 5), 0.15),
    "bravo": ((12, 18), (3, 5), 0.45),
}


def rng_for(*parts) -> np.random.Generator:
    import hashlib

    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return np.random.Generator(np.random.Philox(key=int.from_bytes(digest[:16], "big")))


def make_dump(out_dir: str) -> None:
    rng = rng_for("dump", FIXTURE_SEED)
    posts, comments = [], []
    comment_serial = 0
    for i in range(N_POSTS):
        post_id = f"p{i + 1:03d}"
        author = f"seeker{i % 17:02d}"
        title = TITLES[i % len(TITLES)] + f" ({i + 1})"
        body_idx = rng.choice(len(BODY_SENTENCES), size=3, replace=False)
        body = " ".join(BODY_SENTENCES[j] for j in body_idx)
        deleted = i % 19 == 7
        record = {
            "id": post_id,
            "title": None if i % 23 == 11 else title,
            "body": body,
            "author": author,
            "deleted": deleted,
            "created_at": 1_600_000_000 + i * 3600,
        }
        posts.append(record)
        n_comments = int(rng.integers(1, 4))
        for c in range(n_comments):
            comment_serial += 1
            is_self = c == 2 and i % 5 == 0
            score = int(rng.integers(2, 13))
            text_idx = rng.choice(len(COMMENT_SENTENCES), size=2, replace=False)
            comments.append(
                {
                    "id": f"c{comment_serial:04d}",
                    "post_id": post_id,
                    "author": author if is_self else f"helper{comment_serial % 29:02d}",
                    "body": " ".join(COMMENT_SENTENCES[j] for j in text_idx),
                    "score": score,
                    "created_at": 1_600_000_500 + i * 3600 + c * 60,
                }
            )
    with open(os.path.join(out_dir, "posts.jsonl"), "w", encoding="utf-8") as fh:
        for record in posts:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    with open(os.path.join(out_dir, "comments.jsonl"), "w", encoding="utf-8") as fh:
        for record in comments:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def style_sentence(rng: np.random.Generator, style) -> str:
    (lo, hi), _, complex_fraction = style
    length = int(rng.integers(lo, hi + 1))
    tokens = []
    for _ in range(length):
        if rng.random() < complex_fraction:
            tokens.append(COMPLEX_WORDS[int(rng.integers(0, len(COMPLEX_WORDS)))])
        else:
            tokens.append(SIMPLE_WORDS[int(rng.integers(0, len(SIMPLE_WORDS)))])
    sentence = " ".join(tokens)
    return sentence[0].upper() + sentence[1:] + "."


def make_response(model_id: str, prompt_id: str) -> str:
    style = STYLES[model_id]
    rng = rng_for("response", FIXTURE_SEED, model_id, prompt_id)
    _, (s_lo, s_hi), _ = style
    n_sentences = int(rng.integers(s_lo, s_hi + 1))
    sentences = [style_sentence(rng, style) for _ in range(n_sentences)]
    if rng.random() < 0.6:
        phrase = GENDERED_PHRASES[int(rng.integers(0, len(GENDERED_PHRASES)))]
        sentences.append(phrase[0].upper() + phrase[1:] + ".")
    return " ".join(sentences)


def main() -> int:
    out_dir = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures", "e2e")
    out_dir = os.path.normpath(out_dir)
    os.makedirs(os.path.join(out_dir, "responses"), exist_ok=True)
    make_dump(out_dir)

    store = corpus.parse_dump_files(
        os.path.join(out_dir, "posts.jsonl"), os.path.join(out_dir, "comments.jsonl")
    )
    pairs = corpus.build_pairs(corpus.filter_posts(store))
    spec = corpus.SplitSpec(train_count=TRAIN_COUNT, test_count=TEST_COUNT, seed=FIXTURE_SEED)
    _, test, manifest = corpus.split(pairs, spec)
    print(f"fixture corpus: {len(pairs)} pairs, {manifest.discarded} discarded, "
          f"{len(test)} test prompts")

    for model_id in sorted(STYLES):
        path = os.path.join(out_dir, "responses", f"{model_id}.jsonl")
        with open(path, "w", encoding="utf-8") as fh:
            for pair in sorted(test, key=lambda p: p.prompt_id):
                fh.write(
                    json.dumps(
                        {"prompt_id": pair.prompt_id, "response": make_response(model_id, pair.prompt_id)},
                        sort_keys=True,
                    )
                    + "\n"
                )

    config = {
        "prompts": "work/test.jsonl",
        "models": {m: f"responses/{m}.jsonl" for m in sorted(STYLES)},
        "metrics": [
            "readability",
            "coherence",
            "rouge",
            "bleurt",
            "bertscore",
            "toxicity",
            "genbit",
            "gender_bias",
            "empathy",
            "reflection",
        ],
        "scorers": {"mode": "mock", "seed": 7, "embed_dim": 16, "varied_completions": True},
        "seed": FIXTURE_SEED,
        "alpha": 0.05,
        "mu": 0.3,
        "window_size": 50,
        "topics": {"k": 3, "n": 4},
        "batch_size": 3,
        "reflection": {"features": "hash", "dim": 64, "epochs": 150, "learning_rate": 0.5, "seed": 11},
        "change_pairs": [["alpha", "alpha-ft"], ["bravo", "bravo-ft"]],
        "out_dir": "work/eval",
    }
    with open(os.path.join(out_dir, "config.json"), "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"fixture written to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
