"""Domain types shared across pipeline stages.

These are plain dataclasses with dict round-tripping so every stage can
persist its outputs as deterministic JSON.  Wire-level schemas used to
validate model output live in ``gateway.schemas``; the types here are
what the rest of the pipeline computes with.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SECTION_KINDS = ("aggressive_hook", "brief_context", "intriguing_teaser", "call_to_action")

GENERATION_AGENTS = ("F", "S", "B", "T", "E", "L")
FEEDBACK_AGENTS = ("flashtalk", "sceneplan", "text")


@dataclass
class ImageAsset:
    asset_id: str
    path: str
    kind: str  # figure | table | screenshot
    width_px: int
    height_px: int
    caption: str | None = None

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "path": self.path,
            "kind": self.kind,
            "width_px": self.width_px,
            "height_px": self.height_px,
            "caption": self.caption,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ImageAsset":
        return cls(
            asset_id=d["asset_id"],
            path=d["path"],
            kind=d["kind"],
            width_px=d["width_px"],
            height_px=d["height_px"],
            caption=d.get("caption"),
        )


@dataclass
class PaperAssets:
    paper_id: str
    title: str
    body_text: list[tuple[str, str]]  # (section_heading, section_text)
    images: list[ImageAsset]
    first_page: ImageAsset
    manifest_path: str

    def asset_ids(self) -> list[str]:
        return [a.asset_id for a in self.images]

    def get(self, asset_id: str) -> ImageAsset | None:
        for a in self.images:
            if a.asset_id == asset_id:
                return a
        return None


@dataclass
class Section:
    kind: str
    narration_text: str
    assigned_image_ids: list[str]
    order_index: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "narration_text": self.narration_text,
            "assigned_image_ids": list(self.assigned_image_ids),
            "order_index": self.order_index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Section":
        return cls(d["kind"], d["narration_text"], list(d["assigned_image_ids"]), d["order_index"])


@dataclass
class FlashtalkScript:
    sections: list[Section]
    target_duration_s: float

    def section(self, kind: str) -> Section:
        for s in self.sections:
            if s.kind == kind:
                return s
        raise KeyError(kind)

    def to_dict(self) -> dict:
        return {
            "sections": [s.to_dict() for s in self.sections],
            "target_duration_s": self.target_duration_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlashtalkScript":
        return cls([Section.from_dict(s) for s in d["sections"]], d["target_duration_s"])


@dataclass
class AudioTrack:
    section_kind: str
    path: str
    duration_s: float


@dataclass
class AvatarClip:
    section_kind: str
    path: str | None
    duration_s: float


@dataclass
class TimedImage:
    asset_id: str
    duration_s: float

    def to_dict(self) -> dict:
        return {"asset_id": self.asset_id, "duration_s": self.duration_s}

    @classmethod
    def from_dict(cls, d: dict) -> "TimedImage":
        return cls(d["asset_id"], d["duration_s"])


@dataclass
class SubScene:
    sub_scene_id: str
    description: str
    start_s: float  # relative to its scene's start
    duration_s: float
    images: list[TimedImage] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sub_scene_id": self.sub_scene_id,
            "description": self.description,
            "start_s": self.start_s,
            "duration_s": self.duration_s,
            "images": [t.to_dict() for t in self.images],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SubScene":
        return cls(
            d["sub_scene_id"],
            d["description"],
            d["start_s"],
            d["duration_s"],
            [TimedImage.from_dict(t) for t in d["images"]],
        )


@dataclass
class Scene:
    section_kind: str
    sub_scenes: list[SubScene]

    def to_dict(self) -> dict:
        return {
            "section_kind": self.section_kind,
            "sub_scenes": [s.to_dict() for s in self.sub_scenes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scene":
        return cls(d["section_kind"], [SubScene.from_dict(s) for s in d["sub_scenes"]])


@dataclass
class ScenePlan:
    scenes: list[Scene]

    def all_sub_scenes(self) -> list[tuple[Scene, SubScene]]:
        return [(sc, ss) for sc in self.scenes for ss in sc.sub_scenes]

    def to_dict(self) -> dict:
        return {"scenes": [s.to_dict() for s in self.scenes]}

    @classmethod
    def from_dict(cls, d: dict) -> "ScenePlan":
        return cls([Scene.from_dict(s) for s in d["scenes"]])


@dataclass
class TextOverlay:
    overlay_id: str
    content: str
    font_size_pt: int
    color: str  # "#RRGGBB"
    position: tuple[float, float, float, float]  # normalized (x, y, w, h)
    start_s: float  # relative to sub-scene start
    duration_s: float

    def to_dict(self) -> dict:
        return {
            "overlay_id": self.overlay_id,
            "content": self.content,
            "font_size_pt": self.font_size_pt,
            "color": self.color,
            "position": list(self.position),
            "start_s": self.start_s,
            "duration_s": self.duration_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TextOverlay":
        return cls(
            d["overlay_id"],
            d["content"],
            d["font_size_pt"],
            d["color"],
            tuple(d["position"]),
            d["start_s"],
            d["duration_s"],
        )


@dataclass
class EffectSpec:
    kind: str  # zoom_in | zoom_out | pan | fade_in | fade_out | none
    target_component_id: str
    start_s: float
    duration_s: float
    magnitude: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "target_component_id": self.target_component_id,
            "start_s": self.start_s,
            "duration_s": self.duration_s,
            "magnitude": self.magnitude,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EffectSpec":
        return cls(d["kind"], d["target_component_id"], d["start_s"], d["duration_s"], d["magnitude"])


@dataclass
class LayoutPlan:
    placements: dict[str, tuple[float, float, float, float]]

    def to_dict(self) -> dict:
        return {"placements": {k: list(v) for k, v in sorted(self.placements.items())}}

    @classmethod
    def from_dict(cls, d: dict) -> "LayoutPlan":
        return cls({k: tuple(v) for k, v in d["placements"].items()})


@dataclass
class SceneDirectives:
    sub_scene_id: str
    background: str  # asset id or "#RRGGBB" solid color
    overlays: list[TextOverlay]
    effects: list[EffectSpec]
    layout: LayoutPlan

    def to_dict(self) -> dict:
        return {
            "sub_scene_id": self.sub_scene_id,
            "background": self.background,
            "overlays": [o.to_dict() for o in self.overlays],
            "effects": [e.to_dict() for e in self.effects],
            "layout": self.layout.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneDirectives":
        return cls(
            d["sub_scene_id"],
            d["background"],
            [TextOverlay.from_dict(o) for o in d["overlays"]],
            [EffectSpec.from_dict(e) for e in d["effects"]],
            LayoutPlan.from_dict(d["layout"]),
        )


@dataclass
class VideoArtifact:
    path: str
    duration_s: float
    width_px: int
    height_px: int
    iteration: int


@dataclass
class FrameSet:
    frames: list[str]
    source_span: tuple[float, float]
    resolution: tuple[int, int] = (360, 640)


@dataclass
class FeedbackRecord:
    iteration: int
    agent: str  # flashtalk | sceneplan | text
    sub_scene_id: str
    metric_name: str
    score: int
    comment: str

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "agent": self.agent,
            "sub_scene_id": self.sub_scene_id,
            "metric_name": self.metric_name,
            "score": self.score,
            "comment": self.comment,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackRecord":
        return cls(d["iteration"], d["agent"], d["sub_scene_id"], d["metric_name"], d["score"], d["comment"])


@dataclass
class PromptState:
    agent_id: str  # F | S | B | T | E | L
    iteration: int
    prompt_text: str
