from __future__ import annotations

import io
import json

import pytest
from helpers import comment_line, eight_post_fixture, post_line

from supporteval.corpus import (
    PromptResponsePair,
    SplitSpec,
    build_pairs,
    export_training,
    filter_posts,
    load_training,
    make_persona_variants,
    parse_dump,
    split,
)


class TestParseDump:
    def test_counts_malformed_lines(self):
        posts = [post_line("a"), "{not json", post_line("b"), post_line("c")]
        store = parse_dump(posts, [])
        assert store.post_count == 3
        assert store.malformed_posts == 1

    def test_empty_streams(self):
        store = parse_dump([], [])
        assert store.post_count == 0
        assert store.comment_count == 0
        assert store.malformed_posts == 0
        assert store.malformed_comments == 0

    def test_fixture_sizes(self):
        posts = [post_line(f"p{i}") for i in range(10)]
        comments = [comment_line(f"c{i}", f"p{i % 10}") for i in range(25)]
        store = parse_dump(posts, comments)
        assert store.post_count == 10
        assert store.comment_count == 25

    def test_missing_required_field_is_malformed(self):
        bad_post = json.dumps({"title": "t", "body": "b", "author": "a", "created_at": 1})
        bad_comment = json.dumps({"id": "c", "post_id": "p", "author": "a", "created_at": 1})
        store = parse_dump([bad_post, post_line("ok")], [bad_comment])
        assert store.post_count == 1
        assert store.malformed_posts == 1
        assert store.malformed_comments == 1

    def test_unknown_fields_ignored(self):
        record = json.loads(post_line("p1"))
        record["upvote_ratio"] = 0.93
        store = parse_dump([json.dumps(record)], [])
        assert store.post_count == 1

    def test_orphan_comments_quarantined_not_dropped(self):
        store = parse_dump([post_line("p1")], [comment_line("c1", "nope")])
        assert store.comment_count == 0
        assert len(store.quarantined_comments) == 1


class TestFilterPosts:
    def test_deleted_post_excluded(self):
        store = parse_dump([post_line("p", deleted=True)], [comment_line("c", "p", score=9)])
        assert filter_posts(store).post_count == 0

    def test_score_boundary_strict(self):
        at_four = parse_dump([post_line("p")], [comment_line("c", "p", score=4)])
        assert filter_posts(at_four).post_count == 0
        at_five = parse_dump([post_line("p")], [comment_line("c", "p", score=5)])
        assert filter_posts(at_five).post_count == 1

    def test_eight_post_fixture_exact_survivors(self):
        posts, comments, expected = eight_post_fixture()
        filtered = filter_posts(parse_dump(posts, comments))
        assert set(filtered.posts) == expected

    def test_filtering_is_monotone(self):
        posts, comments, _ = eight_post_fixture()
        before = set(filter_posts(parse_dump(posts, comments)).posts)
        extra_posts = posts + [post_line("p9")]
        extra_comments = comments + [comment_line("c11", "p9", score=8)]
        after = set(filter_posts(parse_dump(extra_posts, extra_comments)).posts)
        assert before <= after


class TestBuildPairs:
    def test_top_scored_other_author_wins(self):
        posts = [post_line("p", author="op")]
        comments = [
            comment_line("c1", "p", score=5, body="ok answer"),
            comment_line("c2", "p", score=9, body="best answer"),
            comment_line("c3", "p", author="op", score=20, body="self plug"),
        ]
        pairs = build_pairs(filter_posts(parse_dump(posts, comments)))
        assert len(pairs) == 1
        assert pairs[0].response_text == "best answer"
        assert pairs[0].response_score == 9

    def test_tie_breaks_on_earliest_timestamp(self):
        posts = [post_line("p")]
        comments = [
            comment_line("c1", "p", score=7, created_at=100, body="late"),
            comment_line("c2", "p", score=7, created_at=50, body="early"),
        ]
        pairs = build_pairs(filter_posts(parse_dump(posts, comments)))
        assert pairs[0].response_text == "early"

    def test_prompt_assembly_with_empty_body(self):
        posts = [post_line("p", title="Help", body="")]
        comments = [comment_line("c", "p", score=6)]
        pairs = build_pairs(filter_posts(parse_dump(posts, comments)))
        assert pairs[0].prompt_text == "Help\n\n"

    def test_every_pair_satisfies_invariants(self):
        posts, comments, _ = eight_post_fixture()
        store = filter_posts(parse_dump(posts, comments))
        for pair in build_pairs(store):
            assert pair.response_score > 4


def make_pairs(n: int) -> list[PromptResponsePair]:
    return [
        PromptResponsePair(
            prompt_id=f"p{i:04d}",
            prompt_text=f"Title {i}\n\nBody {i}",
            response_text=f"Reply {i}",
            response_score=5 + i % 7,
        )
        for i in range(n)
    ]


class TestSplit:
    def test_counts_and_discard(self):
        pairs = make_pairs(50)
        train, test, manifest = split(pairs, SplitSpec(train_count=30, test_count=15, seed=7))
        assert (len(train), len(test)) == (30, 15)
        assert manifest.discarded == 5

    def test_all_to_train_boundary(self):
        pairs = make_pairs(10)
        train, test, manifest = split(pairs, SplitSpec(train_count=10, test_count=0, seed=1))
        assert len(train) == 10 and test == []
        assert manifest.discarded == 0

    def test_same_seed_identical_splits(self):
        pairs = make_pairs(40)
        first = split(pairs, SplitSpec(train_count=25, test_count=10, seed=123))
        second = split(pairs, SplitSpec(train_count=25, test_count=10, seed=123))
        assert first[0] == second[0]
        assert first[1] == second[1]

    def test_different_seed_differs(self):
        pairs = make_pairs(40)
        a = split(pairs, SplitSpec(train_count=25, test_count=10, seed=1))[0]
        b = split(pairs, SplitSpec(train_count=25, test_count=10, seed=2))[0]
        assert a != b

    def test_partition_disjoint(self):
        pairs = make_pairs(30)
        train, test, _ = split(pairs, SplitSpec(train_count=20, test_count=10, seed=5))
        train_ids = {p.prompt_id for p in train}
        test_ids = {p.prompt_id for p in test}
        assert not (train_ids & test_ids)
        assert train_ids | test_ids == {p.prompt_id for p in pairs}

    def test_infeasible_counts_name_available_total(self):
        with pytest.raises(ValueError, match="available 10"):
            split(make_pairs(10), SplitSpec(train_count=9, test_count=2, seed=0))


class TestExport:
    def test_round_trip_identity(self):
        pairs = make_pairs(5)
        buffer = io.StringIO()
        assert export_training(pairs, buffer) == 5
        buffer.seek(0)
        assert load_training(buffer) == pairs

    def test_awkward_characters_escape_cleanly(self):
        pair = PromptResponsePair(
            prompt_id="p",
            prompt_text='Line one\nLine "two"\t\\slash',
            response_text="Reply with é and 'quotes'\nnewline",
            response_score=6,
        )
        buffer = io.StringIO()
        export_training([pair], buffer)
        text = buffer.getvalue()
        assert text.count("\n") == 1  # one record, one line
        buffer.seek(0)
        assert load_training(buffer) == [pair]

    def test_line_count_matches_pairs(self):
        buffer = io.StringIO()
        export_training(make_pairs(100), buffer)
        assert buffer.getvalue().count("\n") == 100

    def test_empty_export_rejected(self):
        with pytest.raises(ValueError):
            export_training([], io.StringIO())


class TestPersonaVariants:
    def test_each_variant_keeps_prompt_as_suffix(self):
        variants = make_persona_variants("p1", "I can't sleep", ["A", "B"])
        assert len(variants) == 2
        assert all(v.variant_text.endswith("I can't sleep") for v in variants)

    def test_empty_personas_empty_output(self):
        assert make_persona_variants("p1", "text", []) == []

    def test_template_prefix(self):
        variant = make_persona_variants("p1", "I worry a lot", ["teenager"])[0]
        assert variant.variant_text.startswith("You are a teenager. ")
        assert variant.persona_label == "teenager"
        assert variant.base_prompt_id == "p1"
