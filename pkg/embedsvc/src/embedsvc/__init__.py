"""Embedding and completion microservice with a deterministic built-in model."""

__version__ = "0.1.0"
