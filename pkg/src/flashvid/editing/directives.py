"""Fixed editing order for one sub-scene.

background -> text -> effects -> markup -> layout -> sanity.  Distinct
sub-scenes are independent; this module handles exactly one.
"""

from __future__ import annotations

from ..config import PipelineConfig
from ..gateway import ModelClient
from ..planning import narration_slice
from ..types import PaperAssets, PromptState, Scene, SceneDirectives, Section, SubScene
from .agents import allocate_layout, generate_effects, generate_text_overlays, select_background
from .markup import AVATAR_COMPONENT_ID, parse_scene_markup, serialize_scene_markup
from .sanity import SanityReport, sanity_check


def build_sub_scene_directives(sub_scene: SubScene, scene: Scene, section: Section,
                               assets: PaperAssets, prompts: dict[str, PromptState],
                               client: ModelClient, config: PipelineConfig,
                               avatar_present: bool) -> tuple[SceneDirectives, SanityReport]:
    """Run every editing agent for one sub-scene and sanity-check the result.

    Args:
        sub_scene: the sub-scene to edit.
        scene: its host scene (for narration slicing).
        section: the narration section backing the scene.
        assets: extracted paper materials.
        prompts: current PromptState per generation agent id.
        client: gateway client.
        config: pipeline config.
        avatar_present: whether an avatar clip renders in this section.

    Returns:
        (directives, sanity report).
    """
    background = select_background(sub_scene, assets, prompts["B"], client, config)

    scene_total = sum(ss.duration_s for ss in scene.sub_scenes)
    slice_text = narration_slice(section.narration_text, sub_scene.start_s,
                                 sub_scene.duration_s, scene_total)
    overlays = generate_text_overlays(sub_scene, slice_text, prompts["T"], client, config)

    component_ids = [t.asset_id for t in sub_scene.images]
    component_ids += [o.overlay_id for o in overlays]
    if avatar_present:
        component_ids.append(AVATAR_COMPONENT_ID)
    effects = generate_effects(sub_scene, component_ids, prompts["E"], client, config)

    markup = serialize_scene_markup(sub_scene, overlays, avatar_present, assets)
    _, components = parse_scene_markup(markup)
    layout = allocate_layout(markup, components, prompts["L"], client, config)

    directives = SceneDirectives(
        sub_scene_id=sub_scene.sub_scene_id,
        background=background,
        overlays=overlays,
        effects=effects,
        layout=layout,
    )
    return sanity_check(directives, sub_scene.duration_s, config)
