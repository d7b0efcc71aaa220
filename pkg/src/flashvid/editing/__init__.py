from .agents import (
    DEFAULT_BACKGROUND,
    FONT_SIZE_MAX,
    FONT_SIZE_MIN,
    allocate_layout,
    generate_effects,
    generate_text_overlays,
    overlays_from_wire,
    select_background,
)
from .directives import build_sub_scene_directives
from .markup import AVATAR_COMPONENT_ID, MarkupComponent, SceneMarkup, parse_scene_markup, serialize_scene_markup
from .sanity import SanityAction, SanityReport, sanity_check

__all__ = [
    "AVATAR_COMPONENT_ID",
    "DEFAULT_BACKGROUND",
    "FONT_SIZE_MAX",
    "FONT_SIZE_MIN",
    "MarkupComponent",
    "SanityAction",
    "SanityReport",
    "SceneMarkup",
    "allocate_layout",
    "build_sub_scene_directives",
    "generate_effects",
    "generate_text_overlays",
    "overlays_from_wire",
    "parse_scene_markup",
    "sanity_check",
    "select_background",
    "serialize_scene_markup",
]
