#!/usr/bin/env python3
"""Run the full pipeline on the e2e fixture and freeze the outputs as
the golden report.

The acceptance suite re-runs the same three commands in a scratch
directory and requires byte equality with what this script freezes.
"""

from __future__ import annotations

import os
import shutil
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from supporteval.cli import main as cli_main  # noqa: E402

GOLDEN_FILES = [
    "work/manifest.json",
    "work/train.jsonl",
    "work/test.jsonl",
    "work/eval/report.md",
    "work/eval/ranks.csv",
    "work/eval/pairwise.csv",
    "work/eval/raw_metrics.jsonl",
    "work/eval/missing.log",
]


def run_pipeline(workdir: str, fixture_dir: str) -> None:
    for name in ("posts.jsonl", "comments.jsonl", "config.json"):
        shutil.copy(os.path.join(fixture_dir, name), workdir)
    shutil.copytree(os.path.join(fixture_dir, "responses"), os.path.join(workdir, "responses"))
    cwd = os.getcwd()
    os.chdir(workdir)
    try:
        assert cli_main([
            "ingest", "--posts", "posts.jsonl", "--comments", "comments.jsonl",
            "--out", "work", "--seed", "424242", "--train", "18", "--test", "10",
        ]) == 0
        assert cli_main(["evaluate", "--config", "config.json", "--offline"]) == 0
        assert cli_main(["analyze", "--config", "config.json"]) == 0
    finally:
        os.chdir(cwd)


def main() -> int:
    root = os.path.normpath(os.path.join(os.path.dirname(__file__), ".."))
    fixture_dir = os.path.join(root, "tests", "fixtures", "e2e")
    golden_dir = os.path.join(root, "tests", "fixtures", "golden")
    with tempfile.TemporaryDirectory() as workdir:
        run_pipeline(workdir, fixture_dir)
        if os.path.isdir(golden_dir):
            shutil.rmtree(golden_dir)
        for rel in GOLDEN_FILES:
            src = os.path.join(workdir, rel)
            dst = os.path.join(golden_dir, rel)
            os.makedirs(os.path.dirname(dst), exist_ok=True)
            shutil.copy(src, dst)
    print(f"golden frozen under {golden_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
