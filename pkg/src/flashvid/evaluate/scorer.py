"""End-to-end video scoring by the evaluation agent.

The agent sees 60 frames sampled over the whole video plus the
narration text, and returns an integer score per rubric metric.  A
metric that is still missing or out of range after retries is recorded
as absent and flagged; flagged reports are dropped from aggregation.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

from .. import jsonio
from ..config import PipelineConfig
from ..compose.frames import sample_frames
from ..gateway import Attachment, ModelClient, ModelRequest
from ..prompts import CONTEXT_MARKER
from ..types import VideoArtifact
from .rubric import CATEGORIES, METRIC_KEYS, RUBRIC

log = logging.getLogger(__name__)

EVAL_FRAME_COUNT = 60

CONDITION_MULTI = "multi_agent"
CONDITION_SINGLE = "single_agent"

_TEMPLATE = (
    "You are the final reviewer of a short research video. You are shown "
    "frames sampled across the whole video and the narration text. Score "
    "every rubric metric with an integer and add a one-line comment each. "
    "Return JSON: {\"scores\": {<key>: int}, \"comments\": {<key>: \"...\"}}."
)


@dataclass
class EvaluationReport:
    paper_id: str
    iteration: int
    scores: dict[str, int]
    comments: dict[str, str]
    category_means: dict[str, float]
    excluded_metrics: list[str] = field(default_factory=list)
    condition: str = CONDITION_MULTI

    @property
    def complete(self) -> bool:
        return not self.excluded_metrics

    def to_dict(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "iteration": self.iteration,
            "condition": self.condition,
            "scores": {k: self.scores[k] for k in sorted(self.scores)},
            "comments": {k: self.comments[k] for k in sorted(self.comments)},
            "category_means": {k: self.category_means[k] for k in sorted(self.category_means)},
            "excluded_metrics": sorted(self.excluded_metrics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        return cls(
            paper_id=d["paper_id"],
            iteration=d["iteration"],
            scores=dict(d["scores"]),
            comments=dict(d["comments"]),
            category_means=dict(d["category_means"]),
            excluded_metrics=list(d["excluded_metrics"]),
            condition=d.get("condition", CONDITION_MULTI),
        )


def category_means(scores: dict[str, int]) -> dict[str, float]:
    """Arithmetic mean per category over the metrics present in scores."""
    means = {}
    for category, keys in CATEGORIES.items():
        present = [scores[k] for k in keys if k in scores]
        if present:
            means[category] = sum(present) / len(present)
    return means


def evaluate_video(video: VideoArtifact, client: ModelClient, config: PipelineConfig,
                   paper_id: str, frames_dir: str, narration_text: str = "",
                   condition: str = CONDITION_MULTI) -> EvaluationReport:
    """Score one video against the full rubric.

    Args:
        video: the video to score (must decode).
        client: gateway client.
        config: pipeline config (score scale bounds).
        paper_id: recorded on the report.
        frames_dir: where sampled frames are written.
        narration_text: full narration, attached as context.
        condition: aggregation condition label.

    Returns:
        EvaluationReport; ``excluded_metrics`` lists whatever stayed
        invalid after retries.
    """
    os.makedirs(frames_dir, exist_ok=True)
    frames = sample_frames(video, (0.0, video.duration_s), EVAL_FRAME_COUNT,
                           frames_dir, prefix="eval")
    attachments = [Attachment(id=f"frame_{k}", path=p) for k, p in enumerate(frames.frames)]
    lo, hi = config.score_scale
    ctx = {
        "metric_names": list(METRIC_KEYS),
        "rubric": {m.key: f"{m.label}: {m.description}" for m in RUBRIC},
        "score_scale": [lo, hi],
        "narration_text": narration_text,
        "duration_s": round(video.duration_s, 3),
    }
    prompt = f"{_TEMPLATE}\n\n{CONTEXT_MARKER}\n{jsonio.dumps(ctx)}"

    scores: dict[str, int] = {}
    comments: dict[str, str] = {}
    # one semantic retry on top of the client's schema retries
    for _ in range(2):
        response = client.complete_structured(ModelRequest(
            agent_id="evaluation", prompt_text=prompt,
            schema_id="evaluation_v1", attached_images=attachments))
        if not response.valid:
            continue
        scores = {k: int(v) for k, v in response.parsed.scores.items()
                  if k in METRIC_KEYS and lo <= int(v) <= hi}
        comments = {k: v for k, v in response.parsed.comments.items() if k in scores}
        if len(scores) == len(METRIC_KEYS):
            break

    excluded = [k for k in METRIC_KEYS if k not in scores]
    if excluded:
        log.warning("evaluation of %s iter %d missing metrics after retries: %s",
                    paper_id, video.iteration, ", ".join(excluded))
    return EvaluationReport(
        paper_id=paper_id,
        iteration=video.iteration,
        scores=scores,
        comments=comments,
        category_means=category_means(scores),
        excluded_metrics=excluded,
        condition=condition,
    )
