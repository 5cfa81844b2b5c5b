"""Batch evaluation harness for model-generated peer-support replies.

Subpackages cover corpus curation, per-response metrics (readability,
coherence, overlap, semantic similarity, toxicity, supportiveness),
external scorer clients with deterministic mocks, and a statistics
engine that ranks model configurations.
"""

__version__ = "0.1.0"
