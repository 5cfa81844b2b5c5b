from __future__ import annotations

import pytest

from supporteval.clients import (
    MockCompletionClient,
    MockEmbeddingClient,
    MockPairScorer,
    MockToxicityClient,
)
from supporteval.pipeline import (
    EvalSettings,
    PromptUnit,
    ResponseUnit,
    ScorerSet,
    build_reflection_training,
    evaluate,
    make_featurizer,
)
from supporteval.support import hashed_features


def mock_scorers(seed: int = 0) -> ScorerSet:
    return ScorerSet(
        embed_client=MockEmbeddingClient(dim=12, seed=seed),
        completion_client=MockCompletionClient(seed=seed, varied=True),
        toxicity_client=MockToxicityClient(seed=seed),
        pair_scorer=MockPairScorer(seed=seed),
    )


def tiny_inputs(n_prompts: int = 6):
    prompts = {}
    for i in range(n_prompts):
        pid = f"p{i:02d}"
        prompts[pid] = PromptUnit(
            prompt_id=pid,
            prompt_text=f"Title {i}\n\nI keep worrying about thing number {i}.",
            reference_text=f"Naming the worry helped me with thing {i}, try writing it down tonight.",
        )
    responses = {}
    for model in ("m-one", "m-two"):
        responses[model] = [
            ResponseUnit(
                prompt_id=pid,
                model_id=model,
                response_text=(
                    f"Slow breaths help with thing {i} says {model}. "
                    f"My brother tried journaling and gratitude daily. "
                    f"Try one small step tonight and rest."
                ),
            )
            for i, pid in enumerate(sorted(prompts))
        ]
    return prompts, responses


class TestEvaluate:
    def test_readability_only_yields_five_ids_per_response(self):
        prompts, responses = tiny_inputs()
        settings = EvalSettings(metric_groups=["readability"])
        result = evaluate(prompts, responses, settings, mock_scorers())
        ids = {r.metric_id for r in result.records}
        assert ids == {"fkg", "gfi", "smog", "ari", "cli"}
        assert len(result.records) == 5 * 2 * 6
        assert result.missing == []

    def test_unknown_prompt_id_is_ledgered(self):
        prompts, responses = tiny_inputs()
        responses["m-one"].append(
            ResponseUnit(prompt_id="ghost", model_id="m-one", response_text="hello there")
        )
        settings = EvalSettings(metric_groups=["readability"])
        result = evaluate(prompts, responses, settings, mock_scorers())
        ghost = [m for m in result.missing if m.unit_id == "ghost"]
        assert len(ghost) == 5
        assert all(m.reason == "unknown prompt_id" for m in ghost)

    def test_full_group_run_is_deterministic(self):
        prompts, responses = tiny_inputs()
        settings = EvalSettings(
            metric_groups=[
                "readability", "rouge", "bertscore", "bleurt", "toxicity",
                "empathy", "reflection", "genbit", "gender_bias", "coherence",
            ],
            window_size=30,
            topic_count=2,
            topic_size=3,
            batch_size=3,
            reflection_dim=32,
            reflection_epochs=40,
            jobs=4,
        )
        first = evaluate(prompts, responses, settings, mock_scorers())
        second = evaluate(prompts, responses, settings, mock_scorers())
        assert first.records == second.records
        assert first.missing == second.missing

    def test_reflection_scores_bounded(self):
        prompts, responses = tiny_inputs()
        settings = EvalSettings(metric_groups=["reflection"], reflection_dim=32,
                                reflection_epochs=30)
        result = evaluate(prompts, responses, settings, mock_scorers())
        values = [r.value for r in result.records if r.metric_id == "reflection"]
        assert len(values) == 12
        assert all(0.0 <= v <= 1.0 for v in values)

    def test_empathy_scores_are_judge_integers(self):
        prompts, responses = tiny_inputs()
        settings = EvalSettings(metric_groups=["empathy"])
        result = evaluate(prompts, responses, settings, mock_scorers())
        assert all(r.value in (0.0, 1.0, 2.0) for r in result.records)
        per_model = len(prompts) * 3
        assert len(result.records) == per_model * 2

    def test_unavailable_toxicity_backend_marks_missing(self):
        from supporteval.clients import BackendUnavailable

        class DeadToxicity:
            def analyze_toxicity(self, text):
                raise BackendUnavailable("exhausted")

        prompts, responses = tiny_inputs(3)
        scorers = mock_scorers()
        scorers.toxicity_client = DeadToxicity()
        settings = EvalSettings(metric_groups=["toxicity"], jobs=1)
        result = evaluate(prompts, responses, settings, scorers)
        assert result.records == []
        assert len(result.missing) == 6 * 3 * 2  # six attributes per response

    def test_malformed_toxicity_reply_surfaces_record_id(self):
        from supporteval.clients import BackendError, BackendReplyError

        class BrokenToxicity:
            def analyze_toxicity(self, text):
                raise BackendReplyError("malformed toxicity reply")

        prompts, responses = tiny_inputs(2)
        scorers = mock_scorers()
        scorers.toxicity_client = BrokenToxicity()
        settings = EvalSettings(metric_groups=["toxicity"], jobs=1)
        with pytest.raises(BackendError, match="record p0"):
            evaluate(prompts, responses, settings, scorers)


class TestReflectionTraining:
    def test_triples_share_dimension_and_train(self):
        prompts, _ = tiny_inputs(4)
        featurize = lambda text: hashed_features(text, 32)
        triples = build_reflection_training(
            [prompts[k] for k in sorted(prompts)], featurize
        )
        assert len(triples) == 4
        assert all(t.prompt_features.shape == (32,) for t in triples)

    def test_make_featurizer_modes(self):
        settings = EvalSettings(metric_groups=["reflection"], reflection_dim=16)
        scorers = mock_scorers()
        hashed = make_featurizer(settings, scorers)
        assert hashed("some text").shape == (16,)
        settings.reflection_features = "embed"
        embedded = make_featurizer(settings, scorers)
        assert embedded("some text").shape == (12,)
        settings.reflection_features = "nope"
        with pytest.raises(ValueError, match="feature source"):
            make_featurizer(settings, scorers)
