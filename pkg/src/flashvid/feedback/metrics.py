"""Metric registry for the three feedback agents.

Each feedback agent judges a fixed set of named metrics.  The
experiment mode narrows each agent to a single metric; full mode uses
the whole registry.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..config import PipelineConfig
from ..errors import UnknownAgent
from ..types import FEEDBACK_AGENTS, SubScene


@dataclass(frozen=True)
class MetricSpec:
    agent: str  # flashtalk | sceneplan | text
    name: str
    description: str


_REGISTRY: dict[str, dict[str, str]] = {
    "flashtalk": {
        "Clarity": "Is the spoken script easy to follow for a viewer who has "
                   "never seen the work before?",
        "Curiosity": "Does the opening make the viewer want to keep watching "
                     "and learn how the story resolves?",
        "Effectiveness": "Does the script get the core contribution across "
                         "within the short runtime?",
    },
    "sceneplan": {
        "Narrative Coherence": "Do the sub-scenes follow each other logically "
                               "and support the narration?",
        "Timing and Pacing": "Are sub-scene lengths comfortable, neither "
                             "rushed nor dragging?",
        "Visual Relevance and Clarity": "Do the shown figures match what the "
                                        "narration is talking about, and are "
                                        "they legible?",
    },
    "text": {
        "Clarity": "Is the on-screen text readable at a glance?",
        "Key Information Coverage": "Does the on-screen text surface the "
                                    "essential points of the narration?",
        "Timing and Alignment": "Does each text element appear and disappear "
                                "in step with what is being said?",
    },
}

_EXPERIMENT_METRIC: dict[str, str] = {
    "flashtalk": "Curiosity",
    "sceneplan": "Visual Relevance and Clarity",
    "text": "Key Information Coverage",
}


def metric_registry() -> dict[str, dict[str, str]]:
    return {agent: dict(metrics) for agent, metrics in _REGISTRY.items()}


def set_metrics(sub_scene: SubScene, agent: str, config: PipelineConfig) -> list[MetricSpec]:
    """Metrics one feedback agent applies to one sub-scene.

    Experiment mode (default) restricts each agent to its single
    headline metric; full mode returns the agent's whole registry.
    """
    if agent not in FEEDBACK_AGENTS:
        raise UnknownAgent(f"no feedback agent {agent!r}")
    table = _REGISTRY[agent]
    if config.metric_mode == "experiment":
        name = _EXPERIMENT_METRIC[agent]
        return [MetricSpec(agent=agent, name=name, description=table[name])]
    return [MetricSpec(agent=agent, name=name, description=desc)
            for name, desc in table.items()]
