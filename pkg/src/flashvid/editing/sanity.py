"""Rule-based directive filtering before composition.

Three checks, applied in order when enabled:
  (a) overlapping text overlays pruned greedily (largest total
      intersection area dropped first) until none intersect,
  (b) overlay/effect time windows clipped to the sub-scene,
  (c) components placed fully outside the frame removed.
Disabled, directives pass through unchanged with an empty report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..config import PipelineConfig
from ..types import EffectSpec, LayoutPlan, SceneDirectives, TextOverlay

_EPS = 1e-12

Rect = tuple[float, float, float, float]


@dataclass
class SanityAction:
    item_id: str
    action: str  # removed_overlay | removed_effect | removed_placement | clipped_timing
    reason: str

    def to_dict(self) -> dict:
        return {"item_id": self.item_id, "action": self.action, "reason": self.reason}


@dataclass
class SanityReport:
    sub_scene_id: str
    enabled: bool
    actions: list[SanityAction] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "sub_scene_id": self.sub_scene_id,
            "enabled": self.enabled,
            "actions": [a.to_dict() for a in self.actions],
        }


def intersection_area(a: Rect, b: Rect) -> float:
    ow = min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0])
    oh = min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1])
    return ow * oh if (ow > 0.0 and oh > 0.0) else 0.0


def effective_rect(overlay: TextOverlay, layout: LayoutPlan) -> Rect:
    """The rect an overlay actually renders at: its placement, else its own position."""
    return layout.placements.get(overlay.overlay_id, overlay.position)


def prune_overlapping(rects: list[Rect]) -> list[int]:
    """Indices that survive greedy overlap pruning.

    Repeatedly drops the rect with the largest summed intersection area
    against the others (ties drop the later index) until no pair
    intersects.  Shared edges count as non-intersecting.
    """
    alive = list(range(len(rects)))
    while len(alive) > 1:
        totals = {
            i: sum(intersection_area(rects[i], rects[j]) for j in alive if j != i)
            for i in alive
        }
        worst = max(alive, key=lambda i: (totals[i], i))
        if totals[worst] <= _EPS:
            break
        alive.remove(worst)
    return alive


def _fully_outside(rect: Rect) -> bool:
    x, y, w, h = rect
    return x >= 1.0 or y >= 1.0 or x + w <= 0.0 or y + h <= 0.0


def sanity_check(directives: SceneDirectives, sub_scene_duration_s: float,
                 config: PipelineConfig) -> tuple[SceneDirectives, SanityReport]:
    """Filter flawed directives for one sub-scene.

    Returns new directives plus a report recording every removal and
    clip.  With ``sanity_check_enabled`` off the input is returned
    untouched and the report is empty.
    """
    report = SanityReport(sub_scene_id=directives.sub_scene_id,
                          enabled=config.sanity_check_enabled)
    if not config.sanity_check_enabled:
        return directives, report

    layout = directives.layout
    overlays = list(directives.overlays)
    effects = list(directives.effects)
    placements = dict(layout.placements)
    removed_ids: set[str] = set()

    # (a) text overlays must not intersect each other
    rects = [effective_rect(o, layout) for o in overlays]
    survivors = set(prune_overlapping(rects))
    for i, overlay in enumerate(overlays):
        if i not in survivors:
            removed_ids.add(overlay.overlay_id)
            report.actions.append(SanityAction(
                overlay.overlay_id, "removed_overlay",
                "intersects another text overlay"))
    overlays = [o for i, o in enumerate(overlays) if i in survivors]

    # (b) clip timings to [0, sub-scene duration]
    def clip_window(item_id: str, start: float, duration: float) -> tuple[float, float] | None:
        end = start + duration
        nstart, nend = max(0.0, start), min(sub_scene_duration_s, end)
        if nend - nstart <= 0.0:
            report.actions.append(SanityAction(
                item_id, "clipped_timing", "entire window outside the sub-scene"))
            return None
        if (nstart, nend) != (start, end):
            report.actions.append(SanityAction(
                item_id, "clipped_timing", "window clipped to the sub-scene"))
        return nstart, nend - nstart

    kept_overlays: list[TextOverlay] = []
    for overlay in overlays:
        window = clip_window(overlay.overlay_id, overlay.start_s, overlay.duration_s)
        if window is None:
            removed_ids.add(overlay.overlay_id)
            continue
        if window != (overlay.start_s, overlay.duration_s):
            overlay = TextOverlay(overlay.overlay_id, overlay.content, overlay.font_size_pt,
                                  overlay.color, overlay.position, window[0], window[1])
        kept_overlays.append(overlay)
    overlays = kept_overlays

    kept_effects: list[EffectSpec] = []
    for effect in effects:
        if effect.target_component_id in removed_ids:
            report.actions.append(SanityAction(
                effect.target_component_id, "removed_effect", "its target was removed"))
            continue
        window = clip_window(f"effect:{effect.target_component_id}", effect.start_s, effect.duration_s)
        if window is None:
            continue
        if window != (effect.start_s, effect.duration_s):
            effect = EffectSpec(effect.kind, effect.target_component_id,
                                window[0], window[1], effect.magnitude)
        kept_effects.append(effect)
    effects = kept_effects

    # (c) drop anything placed fully outside the frame
    for cid in sorted(placements):
        if cid in removed_ids:
            del placements[cid]
            continue
        if _fully_outside(placements[cid]):
            report.actions.append(SanityAction(
                cid, "removed_placement", "placed fully outside the frame"))
            del placements[cid]
            overlays = [o for o in overlays if o.overlay_id != cid]
            before = len(effects)
            effects = [e for e in effects if e.target_component_id != cid]
            for _ in range(before - len(effects)):
                report.actions.append(SanityAction(
                    cid, "removed_effect", "its target was removed"))

    cleaned = SceneDirectives(
        sub_scene_id=directives.sub_scene_id,
        background=directives.background,
        overlays=overlays,
        effects=effects,
        layout=LayoutPlan(placements=placements),
    )
    return cleaned, report
