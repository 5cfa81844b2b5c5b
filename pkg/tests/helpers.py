"""Shared fixture builders for the corpus and acceptance suites."""

from __future__ import annotations

import json


def post_line(id, author="seeker", title="A title", body="Body text.", deleted=False, created_at=100):
    return json.dumps(
        {
            "id": id,
            "title": title,
            "body": body,
            "author": author,
            "deleted": deleted,
            "created_at": created_at,
        }
    )


def comment_line(id, post_id, author="helper", body="A helpful reply.", score=5, created_at=200):
    return json.dumps(
        {
            "id": id,
            "post_id": post_id,
            "author": author,
            "body": body,
            "score": score,
            "created_at": created_at,
        }
    )


def eight_post_fixture() -> tuple[list[str], list[str], set[str]]:
    """Eight posts with mixed violations; exactly p1, p7 and p8 comply."""
    posts = [
        post_line("p1"),
        post_line("p2", deleted=True),
        post_line("p3", title=None),
        post_line("p4", title="   "),
        post_line("p5"),                        # only comment scores exactly 4
        post_line("p6", author="selfposter"),   # only high comment is a self-comment
        post_line("p7"),
        post_line("p8"),
    ]
    comments = [
        comment_line("c1", "p1", score=5),
        comment_line("c2", "p2", score=9),
        comment_line("c3", "p3", score=9),
        comment_line("c4", "p4", score=9),
        comment_line("c5", "p5", score=4),
        comment_line("c6", "p6", author="selfposter", score=10),
        comment_line("c7", "p6", score=2),
        comment_line("c8", "p7", score=9),
        comment_line("c9", "p8", score=6, created_at=300),
        comment_line("c10", "p8", score=7, created_at=400),
    ]
    return posts, comments, {"p1", "p7", "p8"}
