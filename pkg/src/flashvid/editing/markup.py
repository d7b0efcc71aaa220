"""HTML-style scene markup.

The layout agent has no visual input, so it receives the sub-scene's
structure as a small tag tree: one tag per component with an intrinsic
size hint.  serialize/parse round-trips the component set exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from html.parser import HTMLParser

from ..errors import ParseError
from ..types import PaperAssets, SubScene, TextOverlay

AVATAR_COMPONENT_ID = "avatar"
_AVATAR_SIZE = 240


@dataclass
class SceneMarkup:
    markup_text: str


@dataclass
class MarkupComponent:
    id: str
    kind: str  # image | text | avatar
    width: int
    height: int


def serialize_scene_markup(sub_scene: SubScene, overlays: list[TextOverlay],
                           avatar_present: bool, assets: PaperAssets) -> SceneMarkup:
    """Serialize the sub-scene's components with intrinsic size hints."""
    lines = [f'<scene id="{sub_scene.sub_scene_id}">']
    for timed in sub_scene.images:
        asset = assets.get(timed.asset_id)
        w = asset.width_px if asset else 320
        h = asset.height_px if asset else 240
        lines.append(f'  <image id="{timed.asset_id}" width="{w}" height="{h}"/>')
    for overlay in overlays:
        # crude text extent: glyph advance ~0.6em, one line of ascent+descent
        w = max(1, round(len(overlay.content) * overlay.font_size_pt * 0.6))
        h = max(1, round(overlay.font_size_pt * 1.4))
        lines.append(f'  <text id="{overlay.overlay_id}" width="{w}" height="{h}"/>')
    if avatar_present:
        lines.append(f'  <avatar id="{AVATAR_COMPONENT_ID}" width="{_AVATAR_SIZE}" height="{_AVATAR_SIZE}"/>')
    lines.append("</scene>")
    return SceneMarkup(markup_text="\n".join(lines))


class _MarkupReader(HTMLParser):
    def __init__(self):
        super().__init__()
        self.components: list[MarkupComponent] = []
        self.scene_id: str | None = None
        self.depth = 0
        self.seen_ids: set[str] = set()

    def handle_starttag(self, tag, attrs):
        attrs = dict(attrs)
        if tag == "scene":
            if self.depth != 0:
                raise ParseError("nested <scene> tags")
            self.scene_id = attrs.get("id")
            self.depth += 1
            return
        if tag in ("image", "text", "avatar"):
            if self.depth != 1:
                raise ParseError(f"<{tag}> outside <scene>")
            cid = attrs.get("id")
            if not cid:
                raise ParseError(f"<{tag}> without an id")
            if cid in self.seen_ids:
                raise ParseError(f"duplicate component id {cid!r}")
            self.seen_ids.add(cid)
            try:
                width = int(attrs["width"])
                height = int(attrs["height"])
            except (KeyError, ValueError) as exc:
                raise ParseError(f"<{tag} id={cid!r}> needs integer width/height") from exc
            if width <= 0 or height <= 0:
                raise ParseError(f"<{tag} id={cid!r}> has non-positive extent")
            self.components.append(MarkupComponent(id=cid, kind=tag, width=width, height=height))

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)

    def handle_endtag(self, tag):
        if tag == "scene":
            self.depth -= 1
            if self.depth < 0:
                raise ParseError("unbalanced </scene>")


def parse_scene_markup(markup: SceneMarkup) -> tuple[str, list[MarkupComponent]]:
    """Recover (scene id, components) from serialized markup."""
    reader = _MarkupReader()
    reader.feed(markup.markup_text)
    reader.close()
    if reader.scene_id is None or reader.depth != 0:
        raise ParseError("markup is not a single well-formed <scene> tree")
    return reader.scene_id, reader.components
