"""Routing and summarization of feedback records.

Routing is code-side and strict: flashtalk records reach only agent F,
sceneplan only S (optionally E), text only T and L.  Mean scores are
computed here, never taken from the model; the model call only turns a
routed slice into compact guidance text.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .. import jsonio
from ..config import PipelineConfig
from ..gateway import ModelClient, ModelRequest
from ..prompts import CONTEXT_MARKER
from ..types import GENERATION_AGENTS, FeedbackRecord

log = logging.getLogger(__name__)

BASE_ROUTING: dict[str, tuple[str, ...]] = {
    "flashtalk": ("F",),
    "sceneplan": ("S",),
    "text": ("T", "L"),
}

_SUMMARY_TEMPLATE = (
    "You condense review feedback for one video-generation agent into a "
    "short list of actionable guidance. Merge duplicate points, drop "
    "anything outside the agent's responsibility, and keep it under 120 "
    "words per agent. Return JSON: {\"per_agent\": {\"<id>\": {\"summary\": "
    "\"...\"}}}."
)


def routing_map(config: PipelineConfig) -> dict[str, tuple[str, ...]]:
    routes = dict(BASE_ROUTING)
    if config.route_visual_feedback_to_effect:
        routes["sceneplan"] = ("S", "E")
    return routes


@dataclass
class AgentSummary:
    summary_text: str
    metric_means: dict[str, float] = field(default_factory=dict)
    record_count: int = 0

    def to_dict(self) -> dict:
        return {
            "summary_text": self.summary_text,
            "metric_means": {k: self.metric_means[k] for k in sorted(self.metric_means)},
            "record_count": self.record_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AgentSummary":
        return cls(d["summary_text"], dict(d["metric_means"]), d["record_count"])


@dataclass
class FeedbackSummary:
    iteration: int
    per_agent: dict[str, AgentSummary]

    def slice_for(self, agent_id: str) -> str:
        entry = self.per_agent.get(agent_id)
        return entry.summary_text if entry else ""

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "per_agent": {k: self.per_agent[k].to_dict() for k in sorted(self.per_agent)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackSummary":
        return cls(d["iteration"],
                   {k: AgentSummary.from_dict(v) for k, v in d["per_agent"].items()})


def route_records(records: list[FeedbackRecord],
                  config: PipelineConfig) -> dict[str, list[FeedbackRecord]]:
    """Group records by the generation agent allowed to see them."""
    routes = routing_map(config)
    routed: dict[str, list[FeedbackRecord]] = {a: [] for a in GENERATION_AGENTS}
    for record in records:
        for agent_id in routes.get(record.agent, ()):
            routed[agent_id].append(record)
    return routed


def _mean_scores(records: list[FeedbackRecord]) -> dict[str, float]:
    by_metric: dict[str, list[int]] = {}
    for r in records:
        by_metric.setdefault(r.metric_name, []).append(r.score)
    return {m: sum(v) / len(v) for m, v in by_metric.items()}


def _fallback_text(means: dict[str, float], comments: list[str]) -> str:
    parts = [f"mean {m} {means[m]:.2f}" for m in sorted(means)]
    parts += list(dict.fromkeys(comments))[:3]
    return "; ".join(parts)


def summarize_feedback(records: list[FeedbackRecord], client: ModelClient,
                       config: PipelineConfig, iteration: int) -> FeedbackSummary:
    """Summarize one iteration's records per generation agent.

    Every generation agent gets an entry; agents with no routed records
    get an explicitly empty one.  If the summarize call fails
    validation, a deterministic code-side digest stands in.
    """
    if records and any(r.iteration != iteration for r in records):
        raise ValueError("records span multiple iterations")
    routed = route_records(records, config)
    per_agent: dict[str, AgentSummary] = {}
    ctx_slices: dict[str, dict] = {}
    for agent_id in GENERATION_AGENTS:
        slice_records = routed[agent_id]
        means = _mean_scores(slice_records)
        per_agent[agent_id] = AgentSummary(summary_text="", metric_means=means,
                                           record_count=len(slice_records))
        if slice_records:
            ctx_slices[agent_id] = {
                "mean_scores": means,
                "comments": [r.comment for r in slice_records],
            }

    if ctx_slices:
        prompt = f"{_SUMMARY_TEMPLATE}\n\n{CONTEXT_MARKER}\n{jsonio.dumps({'per_agent': ctx_slices})}"
        response = client.complete_structured(ModelRequest(
            agent_id="reflection", prompt_text=prompt, schema_id="feedback_summary_v1"))
        if response.valid:
            for agent_id, entry in response.parsed.per_agent.items():
                if agent_id in ctx_slices:
                    per_agent[agent_id].summary_text = entry.summary
        else:
            log.warning("summarize call failed validation; using code-side digest")
        # any routed agent the model skipped still needs guidance text
        for agent_id, slice_ctx in ctx_slices.items():
            if not per_agent[agent_id].summary_text:
                per_agent[agent_id].summary_text = _fallback_text(
                    slice_ctx["mean_scores"], slice_ctx["comments"])

    return FeedbackSummary(iteration=iteration, per_agent=per_agent)
