"""Scene planning (agent S): timed sub-scene decomposition.

The model proposes per-section sub-scenes with raw durations and image
placements; this module rescales durations to the real audio length,
enforces the 1-5 cardinality, and redistributes images so every
assigned image lands in exactly one sub-scene.
"""

from __future__ import annotations

import json
import logging

from .. import jsonio
from ..errors import InfeasiblePlan, InvalidModelOutput
from ..gateway import ModelRequest
from ..prompts import CONTEXT_MARKER
from ..types import (
    SECTION_KINDS,
    AudioTrack,
    FlashtalkScript,
    PromptState,
    Scene,
    ScenePlan,
    Section,
    SubScene,
    TimedImage,
)

log = logging.getLogger(__name__)

MAX_SUB_SCENES = 5


def generate_sceneplan(script: FlashtalkScript, audio: list[AudioTrack],
                       prompt: PromptState, client, config) -> ScenePlan:
    """Decompose each script section into 1-5 timed sub-scenes.

    Args:
        script: the flash-talk script.
        audio: one AudioTrack per section, any order.
        prompt: agent S's prompt at the current iteration.
        client: gateway ModelClient.
        config: pipeline config.

    Returns:
        ScenePlan whose per-scene durations sum to the section audio
        length and whose images conserve the script's assignment.
    """
    assert prompt.agent_id == "S", "sceneplan needs agent S's prompt"
    by_kind = {t.section_kind: t for t in audio}
    missing = [s.kind for s in script.sections if s.kind not in by_kind]
    if missing:
        raise InvalidModelOutput(f"no audio track for sections: {missing}")

    ctx = {"sections": [
        {
            "kind": s.kind,
            "narration_text": s.narration_text,
            "audio_duration_s": by_kind[s.kind].duration_s,
            "image_ids": list(s.assigned_image_ids),
        }
        for s in script.sections
    ]}
    full_prompt = f"{prompt.prompt_text}\n\n{CONTEXT_MARKER}\n{jsonio.dumps(ctx)}"
    response = client.complete_structured(ModelRequest(
        agent_id="S", prompt_text=full_prompt, schema_id="sceneplan_v1"))
    if not response.valid:
        if _cardinality_breach(response.raw_text):
            raise InfeasiblePlan("model kept proposing a sub-scene count outside 1-5")
        raise InvalidModelOutput("scene plan failed schema validation after retries")

    wire_by_kind = {sc.section_kind: sc for sc in response.parsed.scenes}
    if set(wire_by_kind) != set(SECTION_KINDS):
        raise InvalidModelOutput(f"plan must cover each section exactly once, got {sorted(wire_by_kind)}")

    scenes = []
    for section in script.sections:
        wire_scene = wire_by_kind[section.kind]
        audio_d = by_kind[section.kind].duration_s
        raw_total = sum(ss.duration_s for ss in wire_scene.sub_scenes)
        scale = audio_d / raw_total
        sub_scenes = []
        start = 0.0
        for i, wire_ss in enumerate(wire_scene.sub_scenes):
            duration = wire_ss.duration_s * scale
            sub_scenes.append(SubScene(
                sub_scene_id=f"{section.kind}_{i + 1}",
                description=wire_ss.description.strip(),
                start_s=start,
                duration_s=duration,
                images=[TimedImage(asset_id, duration) for asset_id in wire_ss.image_ids],
            ))
            start += duration
        scene = redistribute_images(Scene(section_kind=section.kind, sub_scenes=sub_scenes), section)
        scenes.append(scene)
    return ScenePlan(scenes=scenes)


def _cardinality_breach(raw_text: str) -> bool:
    try:
        data = json.loads(raw_text)
        for scene in data.get("scenes", []):
            n = len(scene.get("sub_scenes", []))
            if n < 1 or n > MAX_SUB_SCENES:
                return True
    except (json.JSONDecodeError, AttributeError, TypeError):
        pass
    return False


def redistribute_images(scene: Scene, section: Section) -> Scene:
    """Place every assigned image in exactly one sub-scene.

    Model placements are kept when they cite assigned images (first
    placement wins on duplicates; unknown ids are dropped with a
    warning).  Whatever remains unplaced goes to the earliest sub-scene
    holding the fewest images.  Image durations default to the host
    sub-scene's duration, never exceeding it.
    """
    assigned = list(section.assigned_image_ids)
    budget: dict[str, int] = {}
    for asset_id in assigned:
        budget[asset_id] = budget.get(asset_id, 0) + 1

    placements: list[list[TimedImage]] = []
    for sub in scene.sub_scenes:
        kept = []
        for timed in sub.images:
            if budget.get(timed.asset_id, 0) > 0:
                budget[timed.asset_id] -= 1
                duration = min(timed.duration_s, sub.duration_s) if timed.duration_s > 0 else sub.duration_s
                kept.append(TimedImage(timed.asset_id, duration))
            else:
                log.warning("image %r not assignable to section %s; placement dropped",
                            timed.asset_id, section.kind)
        placements.append(kept)

    # unplaced copies, one entry per remaining copy, in assignment order
    leftovers = []
    remaining = dict(budget)
    for asset_id in assigned:
        if remaining.get(asset_id, 0) > 0:
            remaining[asset_id] -= 1
            leftovers.append(asset_id)
    for asset_id in leftovers:
        target = min(range(len(placements)), key=lambda i: (len(placements[i]), i))
        placements[target].append(TimedImage(asset_id, scene.sub_scenes[target].duration_s))

    new_subs = [
        SubScene(
            sub_scene_id=sub.sub_scene_id,
            description=sub.description,
            start_s=sub.start_s,
            duration_s=sub.duration_s,
            images=placed,
        )
        for sub, placed in zip(scene.sub_scenes, placements)
    ]
    return Scene(section_kind=scene.section_kind, sub_scenes=new_subs)
