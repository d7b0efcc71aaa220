"""The 10-metric rubric the evaluation agent scores videos against.

Four categories: content accuracy, clarity, visual/audio sync, and
engagement.  Category means are arithmetic means of member metrics.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EvalMetric:
    key: str
    label: str
    category: str
    description: str


CATEGORY_CONTENT = "Content Accuracy"
CATEGORY_CLARITY = "Clarity"
CATEGORY_SYNC = "Visual & Audio Sync"
CATEGORY_ENGAGEMENT = "Engagement"

RUBRIC: tuple[EvalMetric, ...] = (
    EvalMetric("SI", "Source Integrity", CATEGORY_CONTENT,
               "Does the video stay faithful to the source work, with no "
               "invented results or misattributed claims?"),
    EvalMetric("KCC", "Key Content Coverage", CATEGORY_CONTENT,
               "Are the work's main contributions actually represented, "
               "rather than only side details?"),
    EvalMetric("LF", "Logical Flow", CATEGORY_CLARITY,
               "Does the story progress in an order a newcomer can follow "
               "without backtracking?"),
    EvalMetric("C", "Conciseness", CATEGORY_CLARITY,
               "Is every second earning its place, with no filler or "
               "repeated statements?"),
    EvalMetric("SR", "Scene Relevance", CATEGORY_SYNC,
               "Does each visual belong to the point being narrated when it "
               "is on screen?"),
    EvalMetric("AVA", "Audio-Visual Alignment", CATEGORY_SYNC,
               "Do scene changes and text land in step with the narration?"),
    EvalMetric("AR", "Attention Retention", CATEGORY_ENGAGEMENT,
               "Would a casual scroller keep watching past the first "
               "moments?"),
    EvalMetric("Pacing", "Pacing", CATEGORY_ENGAGEMENT,
               "Are cuts and on-screen elements timed comfortably, neither "
               "frantic nor sluggish?"),
    EvalMetric("CTA", "Call to Action", CATEGORY_ENGAGEMENT,
               "Does the ending point the viewer at a concrete next step?"),
    EvalMetric("HE", "Hook Effectiveness", CATEGORY_ENGAGEMENT,
               "Do the opening seconds give a reason to care?"),
)

METRIC_KEYS: tuple[str, ...] = tuple(m.key for m in RUBRIC)

CATEGORIES: dict[str, tuple[str, ...]] = {
    CATEGORY_CONTENT: ("SI", "KCC"),
    CATEGORY_CLARITY: ("LF", "C"),
    CATEGORY_SYNC: ("SR", "AVA"),
    CATEGORY_ENGAGEMENT: ("AR", "Pacing", "CTA", "HE"),
}


def rubric_by_key() -> dict[str, EvalMetric]:
    return {m.key: m for m in RUBRIC}
