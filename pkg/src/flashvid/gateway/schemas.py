"""Wire schemas for structured model output.

Each schema id names the exact JSON shape one kind of call must return.
Validation happens in the gateway client; downstream code only ever
sees objects that passed their schema.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator

SECTION_KINDS = ("aggressive_hook", "brief_context", "intriguing_teaser", "call_to_action")

EFFECT_KINDS = ("zoom_in", "zoom_out", "pan", "fade_in", "fade_out", "none")


class WireSection(BaseModel):
    kind: str
    narration_text: str = Field(min_length=1)
    image_ids: list[str] = Field(default_factory=list)

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, v):
        if v not in SECTION_KINDS:
            raise ValueError(f"unknown section kind {v!r}")
        return v


class FlashtalkOut(BaseModel):
    sections: list[WireSection]
    target_duration_s: float = Field(gt=0)

    @field_validator("sections")
    @classmethod
    def _four_in_order(cls, v):
        kinds = [s.kind for s in v]
        if kinds != list(SECTION_KINDS):
            raise ValueError(f"sections must be exactly {list(SECTION_KINDS)}, got {kinds}")
        return v


class WireSubScene(BaseModel):
    description: str = Field(min_length=1)
    duration_s: float = Field(gt=0)
    image_ids: list[str] = Field(default_factory=list)


class WireScene(BaseModel):
    section_kind: str
    sub_scenes: list[WireSubScene] = Field(min_length=1, max_length=5)

    @field_validator("section_kind")
    @classmethod
    def _known_kind(cls, v):
        if v not in SECTION_KINDS:
            raise ValueError(f"unknown section kind {v!r}")
        return v


class SceneplanOut(BaseModel):
    scenes: list[WireScene] = Field(min_length=4, max_length=4)


class BackgroundOut(BaseModel):
    background: str = Field(min_length=1)


class WireOverlay(BaseModel):
    content: str = Field(min_length=1)
    font_size_pt: int
    color: str = Field(pattern=r"^#[0-9A-Fa-f]{6}$")
    position: list[float] = Field(min_length=4, max_length=4)
    start_s: float
    duration_s: float = Field(gt=0)


class TextOverlaysOut(BaseModel):
    overlays: list[WireOverlay]


class WireEffect(BaseModel):
    kind: str
    target_component_id: str
    start_s: float = Field(ge=0)
    duration_s: float = Field(ge=0)
    magnitude: float = Field(gt=0, le=4)

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, v):
        if v not in EFFECT_KINDS:
            raise ValueError(f"unknown effect kind {v!r}")
        return v


class EffectsOut(BaseModel):
    effects: list[WireEffect]


class LayoutOut(BaseModel):
    placements: dict[str, list[float]]

    @field_validator("placements")
    @classmethod
    def _rects(cls, v):
        for cid, rect in v.items():
            if len(rect) != 4:
                raise ValueError(f"placement for {cid!r} must be [x, y, w, h]")
        return v


class FeedbackOut(BaseModel):
    metric_name: str = Field(min_length=1)
    score: int = Field(ge=1, le=5)
    comment: str = Field(min_length=1)


class AgentSummaryOut(BaseModel):
    summary: str


class FeedbackSummaryOut(BaseModel):
    per_agent: dict[str, AgentSummaryOut]


class PromptRevisionOut(BaseModel):
    revised_prompt: str = Field(min_length=1)


class EvaluationOut(BaseModel):
    scores: dict[str, int]
    comments: dict[str, str] = Field(default_factory=dict)


class BaselineSubScene(BaseModel):
    description: str = Field(min_length=1)
    duration_s: float = Field(gt=0)
    image_ids: list[str] = Field(default_factory=list)
    overlays: list[WireOverlay] = Field(default_factory=list)


class BaselineScene(BaseModel):
    section_kind: str
    sub_scenes: list[BaselineSubScene] = Field(min_length=1, max_length=5)


class BaselineOut(BaseModel):
    sections: list[WireSection]
    scenes: list[BaselineScene] = Field(min_length=4, max_length=4)

    @field_validator("sections")
    @classmethod
    def _four_in_order(cls, v):
        kinds = [s.kind for s in v]
        if kinds != list(SECTION_KINDS):
            raise ValueError(f"sections must be exactly {list(SECTION_KINDS)}, got {kinds}")
        return v


SCHEMAS: dict[str, type[BaseModel]] = {
    "flashtalk_v1": FlashtalkOut,
    "sceneplan_v1": SceneplanOut,
    "background_v1": BackgroundOut,
    "text_overlays_v1": TextOverlaysOut,
    "effects_v1": EffectsOut,
    "layout_v1": LayoutOut,
    "feedback_v1": FeedbackOut,
    "feedback_summary_v1": FeedbackSummaryOut,
    "prompt_revision_v1": PromptRevisionOut,
    "evaluation_v1": EvaluationOut,
    "baseline_v1": BaselineOut,
}
