"""Per-sub-scene editing agents: background, text overlays, effects, layout.

Each step appends a context payload to the agent's current prompt, runs
one validated model call, and normalizes the reply into domain objects.
Out-of-range values are clamped with a warning rather than rejected;
only replies that stay structurally invalid after retries raise.
"""

from __future__ import annotations

import logging
import math
import re

from .. import jsonio
from ..config import PipelineConfig
from ..errors import InvalidModelOutput
from ..gateway import ModelClient, ModelRequest
from ..prompts import CONTEXT_MARKER
from ..types import EffectSpec, LayoutPlan, PaperAssets, PromptState, SubScene, TextOverlay
from .markup import MarkupComponent, SceneMarkup

log = logging.getLogger(__name__)

FONT_SIZE_MIN = 12
FONT_SIZE_MAX = 96
DEFAULT_BACKGROUND = "#000000"
_HEX_COLOR = re.compile(r"^#[0-9a-fA-F]{6}$")


def _with_context(prompt_text: str, payload: dict) -> str:
    return f"{prompt_text}\n\n{CONTEXT_MARKER}\n{jsonio.dumps(payload)}"


def select_background(sub_scene: SubScene, assets: PaperAssets, prompt: PromptState,
                      client: ModelClient, config: PipelineConfig) -> str:
    """Pick the sub-scene background: an asset id or a "#RRGGBB" color.

    With ``fixed_black_background`` (the default) the background is a
    constant and no model call is made.
    """
    if config.fixed_black_background:
        return DEFAULT_BACKGROUND
    assert prompt.agent_id == "B", "background selection needs agent B's prompt"
    ctx = {
        "sub_scene_id": sub_scene.sub_scene_id,
        "description": sub_scene.description,
        "image_ids": [t.asset_id for t in sub_scene.images],
    }
    response = client.complete_structured(ModelRequest(
        agent_id="B", prompt_text=_with_context(prompt.prompt_text, ctx),
        schema_id="background_v1"))
    if not response.valid:
        raise InvalidModelOutput("background output failed schema validation after retries")
    choice = response.parsed.background
    if _HEX_COLOR.match(choice):
        return choice.lower()
    if any(t.asset_id == choice for t in sub_scene.images):
        return choice
    log.warning("background %r is neither a color nor a sub-scene image; using %s",
                choice, DEFAULT_BACKGROUND)
    return DEFAULT_BACKGROUND


def _clamp_rect(rect, label: str, clamps: list[str]) -> tuple[float, float, float, float]:
    """Force an (x, y, w, h) rect in unit coordinates fully inside the frame."""
    x, y, w, h = (float(v) for v in rect)
    nw = min(max(w, 0.01), 1.0)
    nh = min(max(h, 0.01), 1.0)
    nx = min(max(x, 0.0), 1.0 - nw)
    ny = min(max(y, 0.0), 1.0 - nh)
    if (nx, ny, nw, nh) != (x, y, w, h):
        clamps.append(label)
    return nx, ny, nw, nh


def generate_text_overlays(sub_scene: SubScene, narration_slice_text: str,
                           prompt: PromptState, client: ModelClient,
                           config: PipelineConfig) -> list[TextOverlay]:
    """Produce timed on-screen text for one sub-scene.

    Overlay ids are assigned here (``<sub_scene_id>_txtN``); font sizes
    are clamped to [12, 96] pt and windows clipped to the sub-scene.
    """
    assert prompt.agent_id == "T", "text overlays need agent T's prompt"
    ctx = {
        "sub_scene_id": sub_scene.sub_scene_id,
        "description": sub_scene.description,
        "duration_s": round(sub_scene.duration_s, 3),
        "narration_slice": narration_slice_text,
    }
    response = client.complete_structured(ModelRequest(
        agent_id="T", prompt_text=_with_context(prompt.prompt_text, ctx),
        schema_id="text_overlays_v1"))
    if not response.valid:
        raise InvalidModelOutput("text overlay output failed schema validation after retries")

    overlays, clamps = overlays_from_wire(response.parsed.overlays,
                                          sub_scene.sub_scene_id, sub_scene.duration_s)
    if clamps:
        log.warning("overlay values clamped in %s: %s",
                    sub_scene.sub_scene_id, ", ".join(clamps))
    return overlays


def overlays_from_wire(wires, sub_scene_id: str, duration_s: float,
                       ) -> tuple[list[TextOverlay], list[str]]:
    """Convert validated wire overlays into clamped domain overlays."""
    overlays: list[TextOverlay] = []
    clamps: list[str] = []
    for i, wire in enumerate(wires):
        overlay_id = f"{sub_scene_id}_txt{i + 1}"
        size = wire.font_size_pt
        if not FONT_SIZE_MIN <= size <= FONT_SIZE_MAX:
            clamps.append(f"{overlay_id} font_size")
            size = min(max(size, FONT_SIZE_MIN), FONT_SIZE_MAX)
        x, y, w, h = _clamp_rect(wire.position, f"{overlay_id} position", clamps)
        start = float(wire.start_s)
        duration = float(wire.duration_s)
        if start < 0.0 or start >= duration_s:
            clamps.append(f"{overlay_id} start")
            start = min(max(start, 0.0), max(duration_s - 0.01, 0.0))
        if start + duration > duration_s:
            clamps.append(f"{overlay_id} duration")
            duration = duration_s - start
        overlays.append(TextOverlay(
            overlay_id=overlay_id,
            content=wire.content,
            font_size_pt=int(size),
            color=wire.color.lower(),
            position=(x, y, w, h),
            start_s=start,
            duration_s=duration,
        ))
    return overlays, clamps


def generate_effects(sub_scene: SubScene, component_ids: list[str], prompt: PromptState,
                     client: ModelClient, config: PipelineConfig) -> list[EffectSpec]:
    """Attach motion effects (zoom/pan/fade) to sub-scene components.

    Effects naming components not in ``component_ids`` are dropped with
    a warning; time windows are clipped to the sub-scene.
    """
    assert prompt.agent_id == "E", "effects need agent E's prompt"
    ctx = {
        "sub_scene_id": sub_scene.sub_scene_id,
        "description": sub_scene.description,
        "duration_s": round(sub_scene.duration_s, 3),
        "component_ids": component_ids,
    }
    response = client.complete_structured(ModelRequest(
        agent_id="E", prompt_text=_with_context(prompt.prompt_text, ctx),
        schema_id="effects_v1"))
    if not response.valid:
        raise InvalidModelOutput("effect output failed schema validation after retries")

    known = set(component_ids)
    effects: list[EffectSpec] = []
    for wire in response.parsed.effects:
        if wire.target_component_id not in known:
            log.warning("effect targets unknown component %r in %s; dropped",
                        wire.target_component_id, sub_scene.sub_scene_id)
            continue
        start = min(max(float(wire.start_s), 0.0), sub_scene.duration_s)
        duration = min(float(wire.duration_s), sub_scene.duration_s - start)
        effects.append(EffectSpec(
            kind=wire.kind,
            target_component_id=wire.target_component_id,
            start_s=start,
            duration_s=duration,
            magnitude=float(wire.magnitude),
        ))
    return effects


def _fallback_grid(count: int) -> list[tuple[float, float, float, float]]:
    """Uniform grid rects in reading order, with a small inset per cell."""
    cols = max(1, math.ceil(math.sqrt(count)))
    rows = max(1, math.ceil(count / cols))
    cell_w, cell_h = 1.0 / cols, 1.0 / rows
    rects = []
    for i in range(count):
        r, c = divmod(i, cols)
        rects.append((c * cell_w + 0.05 * cell_w, r * cell_h + 0.05 * cell_h,
                      0.9 * cell_w, 0.9 * cell_h))
    return rects


def allocate_layout(markup: SceneMarkup, components: list[MarkupComponent],
                    prompt: PromptState, client: ModelClient,
                    config: PipelineConfig) -> LayoutPlan:
    """Place every markup component in the unit frame.

    Placements are clamped fully inside [0,1]x[0,1].  Components the
    model failed to place fall back to a uniform grid in markup order;
    placements for unknown ids are dropped.  Both are warned about.
    """
    assert prompt.agent_id == "L", "layout needs agent L's prompt"
    ctx = {
        "markup": markup.markup_text,
        "components": [
            {"id": c.id, "kind": c.kind, "width": c.width, "height": c.height}
            for c in components
        ],
    }
    response = client.complete_structured(ModelRequest(
        agent_id="L", prompt_text=_with_context(prompt.prompt_text, ctx),
        schema_id="layout_v1"))
    if not response.valid:
        raise InvalidModelOutput("layout output failed schema validation after retries")

    known = {c.id for c in components}
    clamps: list[str] = []
    placements: dict[str, tuple[float, float, float, float]] = {}
    for cid, rect in response.parsed.placements.items():
        if cid not in known:
            log.warning("layout places unknown component %r; dropped", cid)
            continue
        placements[cid] = _clamp_rect(rect, cid, clamps)
    if clamps:
        log.warning("layout rects clamped into frame: %s", ", ".join(clamps))

    missing = [c.id for c in components if c.id not in placements]
    if missing:
        log.warning("layout omitted %d component(s) (%s); using fallback grid",
                    len(missing), ", ".join(missing))
        for cid, rect in zip(missing, _fallback_grid(len(missing))):
            placements[cid] = rect
    return LayoutPlan(placements=placements)
