"""Feedback collection: one scored record per (sub-scene, agent, metric).

Feedback agents see sampled frames plus a text context, never the full
video.  A reply that stays invalid after retries is excluded from the
record list and logged, it never aborts the run.
"""

from __future__ import annotations

import logging

from .. import jsonio
from ..config import PipelineConfig
from ..errors import UnknownAgent
from ..gateway import Attachment, ModelClient, ModelRequest
from ..prompts import CONTEXT_MARKER
from ..types import FEEDBACK_AGENTS, FeedbackRecord, FrameSet
from .metrics import MetricSpec

log = logging.getLogger(__name__)

FRAMES_PER_SECTION = 10  # flashtalk feedback sees the whole section
FRAMES_PER_SUB_SCENE = 2  # sceneplan and text feedback see the sub-scene

_TEMPLATES = {
    "flashtalk": (
        "You review the narration script of a short research video. You are "
        "shown frames spanning one script section plus the narration text. "
        "Judge ONLY the named metric and return JSON with keys metric_name, "
        "score (integer 1-5), comment."
    ),
    "sceneplan": (
        "You review the scene planning of a short research video. You are "
        "shown frames of one sub-scene plus its description and narration. "
        "Judge ONLY the named metric and return JSON with keys metric_name, "
        "score (integer 1-5), comment."
    ),
    "text": (
        "You review the on-screen text of a short research video. You are "
        "shown frames of one sub-scene plus its overlay contents and "
        "narration. Judge ONLY the named metric and return JSON with keys "
        "metric_name, score (integer 1-5), comment."
    ),
}


def run_feedback_agent(agent: str, frames: FrameSet, context: dict,
                       metrics: list[MetricSpec], iteration: int, sub_scene_id: str,
                       client: ModelClient, config: PipelineConfig) -> list[FeedbackRecord]:
    """Collect one FeedbackRecord per metric for one sub-scene.

    Args:
        agent: feedback agent name (flashtalk | sceneplan | text).
        frames: sampled frames this agent is allowed to see.
        context: textual context (narration slice, directives digest).
        metrics: metrics to score, usually from set_metrics.
        iteration: current iteration j (>= 1 when feedback runs).
        sub_scene_id: the judged sub-scene.
        client: gateway client.
        config: pipeline config.

    Returns:
        Valid records only; invalid replies are excluded and logged.
    """
    if agent not in FEEDBACK_AGENTS:
        raise UnknownAgent(f"no feedback agent {agent!r}")
    if not metrics:
        raise ValueError("metrics must be nonempty")
    attachments = [Attachment(id=f"frame_{k}", path=p) for k, p in enumerate(frames.frames)]

    records = []
    for metric in metrics:
        ctx = dict(context)
        ctx["metric_name"] = metric.name
        ctx["metric_description"] = metric.description
        prompt = f"{_TEMPLATES[agent]}\n\n{CONTEXT_MARKER}\n{jsonio.dumps(ctx)}"
        response = client.complete_structured(ModelRequest(
            agent_id=f"feedback_{agent}", prompt_text=prompt,
            schema_id="feedback_v1", attached_images=attachments))
        if not response.valid:
            log.warning("feedback excluded: %s/%s on %s failed validation after %d attempts",
                        agent, metric.name, sub_scene_id, response.attempts)
            continue
        if response.parsed.metric_name != metric.name:
            log.warning("feedback excluded: %s answered metric %r, asked %r (%s)",
                        agent, response.parsed.metric_name, metric.name, sub_scene_id)
            continue
        records.append(FeedbackRecord(
            iteration=iteration,
            agent=agent,
            sub_scene_id=sub_scene_id,
            metric_name=metric.name,
            score=int(response.parsed.score),
            comment=response.parsed.comment,
        ))
    return records
