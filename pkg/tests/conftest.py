from __future__ import annotations

import json
import os

import pytest

FIXTURES_DIR = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def stats_oracle() -> dict:
    with open(os.path.join(FIXTURES_DIR, "stats_oracle.json"), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def fixtures_dir() -> str:
    return FIXTURES_DIR
