from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from riskbench.corpus import RawPost, UserTimeline
from riskbench.pilot import BDI_ITEM_KEYS


def ts(hour: int, minute: int = 0, day: int = 1) -> datetime:
    return datetime(2024, 3, day, hour, minute, 0, tzinfo=timezone.utc)


def make_post(post_id: str, when: datetime, title: str = "", body: str = "") -> RawPost:
    return RawPost(post_id=post_id, timestamp=when, title=title, body=body)


def make_timeline(user_id: str, posts) -> UserTimeline:
    return UserTimeline(user_id=user_id, posts=list(posts))


@pytest.fixture
def six_user_corpus() -> list[UserTimeline]:
    """Six users with one to three writings each."""
    out = []
    for i, n_posts in enumerate([1, 2, 3, 2, 1, 3]):
        user = f"u{i}"
        posts = [make_post(f"{user}-p{j}", ts(hour=8 + j, day=1 + i), body=f"text {j}")
                 for j in range(n_posts)]
        out.append(make_timeline(user, posts))
    return out


def make_item_scores(scores=None) -> dict:
    """A full bdi_scores object; `scores` maps item index (0-based) to value."""
    scores = scores or {}
    return {
        key: {"score": int(scores.get(i, 0)), "reason": "from conversation"}
        for i, key in enumerate(BDI_ITEM_KEYS)
    }


def make_turn(
    turn: int,
    state: str = "Gathering",
    total: int = 0,
    classification: str = "Uncertain",
    confidence: float = 0.5,
    key_symptoms=(),
    item_scores=None,
    complete: bool = False,
    input_message: str = "persona message",
    output_message: str = "agent message",
    reasoning: str = "probe the next domain",
) -> dict:
    return {
        "input_message": input_message,
        "output_message": output_message,
        "next_step_reasoning": reasoning,
        "evaluation": {
            "assessment_turn": turn,
            "assessment_state": state,
            "assessment_complete": complete,
            "total_bdi_score": total,
            "classification_suggestion": classification,
            "confidence": confidence,
            "key_symptoms": list(key_symptoms),
            "bdi_scores": item_scores if item_scores is not None else make_item_scores(),
        },
    }


def make_transcript_dict(model: str = "model-a", persona: str = "persona-1",
                         turns=None) -> dict:
    if turns is None:
        turns = [make_turn(1, state="Initializing"), make_turn(2)]
    return {"model": model, "persona": persona, "turns": turns}


def transcript_bytes(**kwargs) -> bytes:
    return json.dumps(make_transcript_dict(**kwargs)).encode("utf-8")
