from __future__ import annotations

import math

import numpy as np
import pytest

from supporteval.coherence import (
    TopicWordSet,
    build_cooccurrence,
    coherence_cnpmi,
    coherence_cv,
    extract_topics,
    load_stopwords,
    npmi,
    score_topics,
)


def independent_corpus():
    """Eight single-window docs giving p(a)=p(b)=p(c)=1/2 and every
    pairwise joint exactly 1/4 (statistical independence)."""
    return [
        ["a", "b", "c"],
        ["a", "b"],
        ["a", "c"],
        ["a"],
        ["b", "c"],
        ["b"],
        ["c"],
        ["x"],
    ]


class TestBuildCooccurrence:
    def test_single_window(self):
        stats = build_cooccurrence([["a", "b"]], window_size=2)
        assert stats.total_windows == 1
        assert stats.pair_counts[frozenset(("a", "b"))] == 1

    def test_sliding_windows_by_hand(self):
        # windows of [a,b,a,b] at size 2: (a,b), (b,a), (a,b) -> 3 windows,
        # each containing both words
        stats = build_cooccurrence([["a", "b", "a", "b"]], window_size=2)
        assert stats.total_windows == 3
        assert stats.word_counts["a"] == 3
        assert stats.word_counts["b"] == 3
        assert stats.pair_counts[frozenset(("a", "b"))] == 3

    def test_short_doc_is_one_window(self):
        stats = build_cooccurrence([["a", "b"]], window_size=110)
        assert stats.total_windows == 1

    def test_disjoint_docs_have_no_cross_pairs(self):
        stats = build_cooccurrence([["a", "b"], ["c", "d"]], window_size=2)
        assert frozenset(("a", "c")) not in stats.pair_counts
        assert stats.joint_probability("a", "c") == 0.0

    def test_pair_bounded_by_word_counts(self):
        docs = [["a", "b", "c", "a"], ["b", "a"], ["c"]]
        stats = build_cooccurrence(docs, window_size=3)
        for pair, count in stats.pair_counts.items():
            w1, w2 = tuple(pair)
            assert count <= min(stats.word_counts[w1], stats.word_counts[w2])

    def test_errors(self):
        with pytest.raises(ValueError, match="empty corpus"):
            build_cooccurrence([], window_size=2)
        with pytest.raises(ValueError, match="window_size"):
            build_cooccurrence([["a"]], window_size=1)


class TestNpmi:
    def test_perfect_association_tends_to_one(self):
        # p(a) = p(b) = p(ab) = 1/2
        stats = build_cooccurrence([["a", "b"], ["x"]], window_size=2)
        assert npmi(stats, "a", "b") == pytest.approx(1.0, abs=1e-9)

    def test_independent_words_near_zero(self):
        stats = build_cooccurrence(independent_corpus(), window_size=3)
        assert npmi(stats, "a", "b") == pytest.approx(0.0, abs=1e-9)

    def test_hand_arithmetic_quarter_joint(self):
        stats = build_cooccurrence(independent_corpus(), window_size=3)
        eps = 1e-12
        expected = math.log((0.25 + eps) / 0.25) / -math.log(0.25 + eps)
        assert npmi(stats, "b", "c") == pytest.approx(expected, abs=1e-15)

    def test_unknown_word_raises(self):
        stats = build_cooccurrence([["a", "b"]], window_size=2)
        with pytest.raises(ValueError, match="unknown word"):
            npmi(stats, "a", "zzz")

    def test_bounds_on_random_corpora(self):
        rng = np.random.Generator(np.random.Philox(key=42))
        vocab = [f"w{i}" for i in range(12)]
        docs = [
            [vocab[i] for i in rng.integers(0, len(vocab), size=rng.integers(2, 30))]
            for _ in range(40)
        ]
        stats = build_cooccurrence(docs, window_size=5)
        seen = sorted(stats.word_counts)
        checked = 0
        for i, w1 in enumerate(seen):
            for w2 in seen[i + 1 :]:
                value = npmi(stats, w1, w2)
                assert -1.0 <= value <= 1.0
                checked += 1
        assert checked > 50

    def test_corpus_duplication_leaves_npmi_unchanged(self):
        docs = [["a", "b", "c"], ["b", "c"], ["a", "d"], ["d", "c", "b"]]
        stats_once = build_cooccurrence(docs, window_size=3)
        stats_twice = build_cooccurrence(docs + docs, window_size=3)
        assert stats_twice.total_windows == 2 * stats_once.total_windows
        for pair in stats_once.pair_counts:
            w1, w2 = tuple(pair)
            assert abs(npmi(stats_once, w1, w2) - npmi(stats_twice, w1, w2)) < 1e-9


class TestTopicCoherence:
    def test_two_word_topic_equals_pair_npmi(self):
        stats = build_cooccurrence(independent_corpus(), window_size=3)
        topic = TopicWordSet(0, ("a", "b"))
        assert coherence_cnpmi(topic, stats) == npmi(stats, "a", "b")

    def test_perfect_cooccurrers_tend_to_one(self):
        stats = build_cooccurrence([["a", "b", "c"], ["x"]], window_size=3)
        topic = TopicWordSet(0, ("a", "b", "c"))
        assert coherence_cnpmi(topic, stats) == pytest.approx(1.0, abs=1e-9)
        assert coherence_cv(topic, stats) == pytest.approx(1.0, abs=1e-9)

    def test_one_pair_topic_with_perfect_cooccurrence_is_one(self):
        stats = build_cooccurrence([["a", "b"], ["x"]], window_size=2)
        assert coherence_cv(TopicWordSet(0, ("a", "b")), stats) == pytest.approx(1.0, abs=1e-9)

    def test_three_word_topic_is_mean_of_pairs(self):
        stats = build_cooccurrence(independent_corpus(), window_size=3)
        topic = TopicWordSet(0, ("a", "b", "c"))
        expected = (
            npmi(stats, "a", "b") + npmi(stats, "a", "c") + npmi(stats, "b", "c")
        ) / 3.0
        assert coherence_cnpmi(topic, stats) == pytest.approx(expected, abs=1e-15)

    def test_cv_orthogonal_vectors_hand_value(self):
        # independent words: NPMI matrix ~ identity, so each word vector is
        # a basis vector and the sum is (1,1,1): every cosine is 1/sqrt(3)
        stats = build_cooccurrence(independent_corpus(), window_size=3)
        topic = TopicWordSet(0, ("a", "b", "c"))
        assert coherence_cv(topic, stats) == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-6)

    def test_cv_bounds_on_random_topics(self):
        rng = np.random.Generator(np.random.Philox(key=9))
        vocab = [f"w{i}" for i in range(10)]
        docs = [
            [vocab[i] for i in rng.integers(0, len(vocab), size=rng.integers(3, 20))]
            for _ in range(30)
        ]
        stats = build_cooccurrence(docs, window_size=4)
        present = sorted(stats.word_counts)
        for _ in range(25):
            chosen = rng.choice(len(present), size=4, replace=False)
            topic = TopicWordSet(0, tuple(present[i] for i in chosen))
            assert 0.0 <= coherence_cv(topic, stats) <= 1.0

    def test_score_topics_shapes(self):
        stats = build_cooccurrence(independent_corpus(), window_size=3)
        topics = [TopicWordSet(0, ("a", "b")), TopicWordSet(1, ("b", "c"))]
        scores = score_topics(topics, stats)
        assert len(scores) == 2
        assert all(-1.0 <= s.c_npmi <= 1.0 and 0.0 <= s.c_v <= 1.0 for s in scores)

    def test_topic_validation(self):
        with pytest.raises(ValueError):
            TopicWordSet(0, ("solo",))
        with pytest.raises(ValueError, match="distinct"):
            TopicWordSet(0, ("dup", "dup"))


class TestExtractTopics:
    def test_hand_tfidf_ranking(self):
        docs = [
            ["calm", "calm", "calm", "breath"],
            ["calm", "breath", "panic"],
            ["breath", "sleep", "worry", "worry"],
        ]
        # tf*idf with idf = ln((1+D)/(1+df)) + 1:
        #   calm 4*1.2877=5.151, worry 2*1.6931=3.386, breath 3*1.0=3.0,
        #   panic = sleep = 1.6931 (tie broken alphabetically)
        topics = extract_topics(docs, k=2, n=2, stopwords=frozenset())
        assert topics[0].words == ("calm", "worry")
        assert topics[1].words == ("breath", "panic")

    def test_exact_partition(self):
        docs = [["alpha", "beta"], ["gamma", "delta"]]
        topics = extract_topics(docs, k=2, n=2, stopwords=frozenset())
        seen = [w for t in topics for w in t.words]
        assert sorted(seen) == ["alpha", "beta", "delta", "gamma"]
        assert len(set(seen)) == 4

    def test_stopwords_never_appear(self):
        stopwords = load_stopwords()
        docs = [["the", "and", "calm", "breath"], ["the", "worry", "sleep"]]
        topics = extract_topics(docs, k=1, n=4, stopwords=stopwords)
        assert not (set(topics[0].words) & stopwords)

    def test_vocabulary_too_small(self):
        with pytest.raises(ValueError, match="vocabulary too small"):
            extract_topics([["only", "four", "words", "here"]], k=3, n=2, stopwords=frozenset())

    def test_stats_filter(self):
        docs = [["known", "alpha"], ["beta", "known"]]
        stats = build_cooccurrence([["known", "alpha", "beta", "extra"]], window_size=4)
        topics = extract_topics(docs, k=1, n=2, stats=stats, stopwords=frozenset())
        assert set(topics[0].words) <= set(stats.word_counts)
