"""Deterministic sub-scene rendering.

A ClipSegment is a pure function local-time -> frame.  Draw order per
frame: background, images (per layout), avatar, text overlays.  Effects
are linear interpolations over their windows: zoom scales from 1 to
magnitude, pan displaces by magnitude in normalized units, fades ramp
alpha.  Outside its window an effect holds its boundary value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import cv2
import numpy as np
from PIL import Image, ImageDraw, ImageFont

from ..config import PipelineConfig
from ..editing.markup import AVATAR_COMPONENT_ID
from ..errors import MissingAsset, RenderError
from ..types import PaperAssets, SceneDirectives, SubScene, TextOverlay

# font_size_pt is interpreted against this canvas height, so text keeps
# its proportion when the output canvas changes
PT_REFERENCE_HEIGHT = 960

DEFAULT_AVATAR_RECT = (0.72, 0.84, 0.24, 0.135)

_HEX_COLOR = re.compile(r"^#[0-9a-fA-F]{6}$")


def _hex_to_bgr(color: str) -> tuple[int, int, int]:
    r, g, b = (int(color[i:i + 2], 16) for i in (1, 3, 5))
    return (b, g, r)


def _load_asset(assets: PaperAssets, asset_id: str, cache: dict) -> np.ndarray:
    if asset_id not in cache:
        asset = assets.get(asset_id)
        if asset is None:
            raise MissingAsset(f"directives reference unknown asset {asset_id!r}")
        img = cv2.imread(asset.path, cv2.IMREAD_COLOR)
        if img is None:
            raise MissingAsset(f"asset file does not decode: {asset.path}")
        cache[asset_id] = img
    return cache[asset_id]


def _cover(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resize + center-crop to fill width x height preserving aspect."""
    ih, iw = img.shape[:2]
    scale = max(width / iw, height / ih)
    rw, rh = max(width, round(iw * scale)), max(height, round(ih * scale))
    resized = cv2.resize(img, (rw, rh), interpolation=cv2.INTER_AREA)
    x0, y0 = (rw - width) // 2, (rh - height) // 2
    return resized[y0:y0 + height, x0:x0 + width]


def _wrap_text(draw: ImageDraw.ImageDraw, text: str, font, max_width: int) -> list[str]:
    words = text.split()
    lines, current = [], ""
    for word in words:
        candidate = f"{current} {word}".strip()
        if current and draw.textlength(candidate, font=font) > max_width:
            lines.append(current)
            current = word
        else:
            current = candidate
    if current:
        lines.append(current)
    return lines or [""]


def _text_bitmap(overlay: TextOverlay, rect_px: tuple[int, int, int, int],
                 canvas_height: int) -> np.ndarray:
    """Render an overlay's text into a BGRA bitmap of the rect's size."""
    _, _, w, h = rect_px
    w, h = max(w, 2), max(h, 2)
    font_px = max(8, round(overlay.font_size_pt * canvas_height / PT_REFERENCE_HEIGHT))
    font = ImageFont.load_default(size=font_px)
    img = Image.new("RGBA", (w, h), (0, 0, 0, 0))
    draw = ImageDraw.Draw(img)
    r, g, b = (int(overlay.color[i:i + 2], 16) for i in (1, 3, 5))
    y = 0
    line_h = round(font_px * 1.25)
    for line in _wrap_text(draw, overlay.content, font, w):
        if y + line_h > h + line_h // 2:
            break  # rect is full
        draw.text((0, y), line, font=font, fill=(r, g, b, 255))
        y += line_h
    rgba = np.asarray(img)
    return rgba[:, :, [2, 1, 0, 3]].copy()  # to BGRA


def _effect_state(effects, component_id: str, t: float) -> tuple[float, float, float]:
    """(scale, dx, alpha) for one component at local time t."""
    scale, dx, alpha = 1.0, 0.0, 1.0
    for e in effects:
        if e.target_component_id != component_id:
            continue
        if e.duration_s <= 0:
            progress = 1.0 if t >= e.start_s else 0.0
        else:
            progress = min(1.0, max(0.0, (t - e.start_s) / e.duration_s))
        if e.kind == "zoom_in":
            scale *= 1.0 + (e.magnitude - 1.0) * progress
        elif e.kind == "zoom_out":
            scale *= 1.0 + (1.0 / e.magnitude - 1.0) * progress
        elif e.kind == "pan":
            dx += e.magnitude * progress
        elif e.kind == "fade_in":
            alpha *= progress
        elif e.kind == "fade_out":
            alpha *= 1.0 - progress
        # "none" is a no-op
    return scale, dx, alpha


def _composite(canvas: np.ndarray, bitmap: np.ndarray, rect_px: tuple[int, int, int, int],
               alpha: float) -> None:
    """Alpha-blend bitmap (BGR or BGRA) resized into rect, clipped to canvas."""
    if alpha <= 0.0:
        return
    ch, cw = canvas.shape[:2]
    x, y, w, h = rect_px
    if w < 1 or h < 1:
        return
    if bitmap.shape[1] != w or bitmap.shape[0] != h:
        bitmap = cv2.resize(bitmap, (w, h), interpolation=cv2.INTER_AREA)
    # clip target rect to the canvas
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + w, cw), min(y + h, ch)
    if x0 >= x1 or y0 >= y1:
        return
    part = bitmap[y0 - y:y1 - y, x0 - x:x1 - x]
    roi = canvas[y0:y1, x0:x1]
    if part.shape[2] == 4:
        a = (part[:, :, 3:4].astype(np.float32) / 255.0) * alpha
        blended = part[:, :, :3].astype(np.float32) * a + roi.astype(np.float32) * (1.0 - a)
    else:
        blended = part.astype(np.float32) * alpha + roi.astype(np.float32) * (1.0 - alpha)
    canvas[y0:y1, x0:x1] = np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def _scaled_rect(rect: tuple[float, float, float, float], scale: float, dx: float,
                 width: int, height: int) -> tuple[int, int, int, int]:
    """Pixel rect after zooming about the center and panning horizontally."""
    x, y, w, h = rect
    cx, cy = x + w / 2.0 + dx, y + h / 2.0
    nw, nh = w * scale, h * scale
    return (round((cx - nw / 2.0) * width), round((cy - nh / 2.0) * height),
            max(1, round(nw * width)), max(1, round(nh * height)))


@dataclass
class ClipSegment:
    """Lazily rendered clip for one sub-scene."""
    sub_scene_id: str
    duration_s: float
    _render: Callable[[float, np.ndarray | None], np.ndarray] = field(repr=False)

    def render_at(self, t: float, avatar_frame: np.ndarray | None = None) -> np.ndarray:
        """Frame at local time t (clamped into the clip)."""
        t = min(max(t, 0.0), self.duration_s)
        return self._render(t, avatar_frame)

    def frame_count(self, fps: int) -> int:
        return max(1, round(self.duration_s * fps))


def build_subscene_clip(directives: SceneDirectives, assets: PaperAssets,
                        sub_scene: SubScene, config: PipelineConfig) -> ClipSegment:
    """Compile directives into a pure time->frame renderer.

    The avatar bitmap is supplied per call by the assembler (it is a
    section-level stream, not a sub-scene directive); its placement and
    effects are still honored here.
    """
    if directives.sub_scene_id != sub_scene.sub_scene_id:
        raise RenderError("directives and sub-scene disagree on id")
    width, height = config.canvas
    placements = directives.layout.placements
    effects = directives.effects
    cache: dict[str, np.ndarray] = {}

    if _HEX_COLOR.match(directives.background):
        bg_frame = np.empty((height, width, 3), dtype=np.uint8)
        bg_frame[:] = _hex_to_bgr(directives.background)
    else:
        bg_frame = _cover(_load_asset(assets, directives.background, cache), width, height)

    # preload image bitmaps and pre-render overlay text at placement size
    for timed in sub_scene.images:
        if timed.asset_id in placements:
            _load_asset(assets, timed.asset_id, cache)
    text_bitmaps: dict[str, np.ndarray] = {}
    overlay_rects: dict[str, tuple[float, float, float, float]] = {}
    for overlay in directives.overlays:
        rect = placements.get(overlay.overlay_id, overlay.position)
        overlay_rects[overlay.overlay_id] = rect
        rect_px = (round(rect[0] * width), round(rect[1] * height),
                   max(1, round(rect[2] * width)), max(1, round(rect[3] * height)))
        text_bitmaps[overlay.overlay_id] = _text_bitmap(overlay, rect_px, height)

    avatar_rect = placements.get(AVATAR_COMPONENT_ID, DEFAULT_AVATAR_RECT)

    def render(t: float, avatar_frame: np.ndarray | None) -> np.ndarray:
        frame = bg_frame.copy()
        for timed in sub_scene.images:
            if timed.asset_id not in placements or t >= timed.duration_s:
                continue
            scale, dx, alpha = _effect_state(effects, timed.asset_id, t)
            rect_px = _scaled_rect(placements[timed.asset_id], scale, dx, width, height)
            _composite(frame, cache[timed.asset_id], rect_px, alpha)
        if avatar_frame is not None:
            scale, dx, alpha = _effect_state(effects, AVATAR_COMPONENT_ID, t)
            rect_px = _scaled_rect(avatar_rect, scale, dx, width, height)
            _composite(frame, avatar_frame, rect_px, alpha)
        for overlay in directives.overlays:
            if not overlay.start_s <= t < overlay.start_s + overlay.duration_s:
                continue
            scale, dx, alpha = _effect_state(effects, overlay.overlay_id, t)
            rect_px = _scaled_rect(overlay_rects[overlay.overlay_id], scale, dx, width, height)
            _composite(frame, text_bitmaps[overlay.overlay_id], rect_px, alpha)
        return frame

    return ClipSegment(sub_scene_id=sub_scene.sub_scene_id,
                       duration_s=sub_scene.duration_s, _render=render)
