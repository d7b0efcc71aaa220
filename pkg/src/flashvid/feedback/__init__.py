from .agents import FRAMES_PER_SECTION, FRAMES_PER_SUB_SCENE, run_feedback_agent
from .loop import run_feedback_iteration
from .metrics import MetricSpec, metric_registry, set_metrics
from .reflect import reflect_prompt
from .summarize import (
    BASE_ROUTING,
    AgentSummary,
    FeedbackSummary,
    route_records,
    routing_map,
    summarize_feedback,
)

__all__ = [
    "BASE_ROUTING",
    "AgentSummary",
    "FRAMES_PER_SECTION",
    "FRAMES_PER_SUB_SCENE",
    "FeedbackSummary",
    "MetricSpec",
    "metric_registry",
    "reflect_prompt",
    "route_records",
    "routing_map",
    "run_feedback_agent",
    "run_feedback_iteration",
    "set_metrics",
    "summarize_feedback",
]
