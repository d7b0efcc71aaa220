"""Flash-talk script generation (agent F)."""

from __future__ import annotations

import logging

from .. import jsonio
from ..errors import InvalidModelOutput
from ..gateway import ModelRequest
from ..prompts import CONTEXT_MARKER
from ..types import SECTION_KINDS, FlashtalkScript, PaperAssets, PromptState, Section

log = logging.getLogger(__name__)


def build_context(assets: PaperAssets, target_duration_s: float) -> dict:
    return {
        "title": assets.title,
        "section_headings": [h for h, _ in assets.body_text if h],
        "abstract": assets.body_text[0][1][:600] if assets.body_text else "",
        "assets": [
            {"id": a.asset_id, "kind": a.kind, "caption": a.caption or ""}
            for a in assets.images
        ],
        "target_duration_s": target_duration_s,
    }


def generate_flashtalk(assets: PaperAssets, prompt: PromptState, client, config) -> FlashtalkScript:
    """Produce the four-section narrative script.

    Args:
        assets: extracted paper materials.
        prompt: agent F's prompt at the current iteration.
        client: gateway ModelClient.
        config: pipeline config.

    Returns:
        FlashtalkScript in canonical section order, image references
        validated against the manifest.
    """
    assert prompt.agent_id == "F", "flashtalk needs agent F's prompt"
    ctx = build_context(assets, config.target_duration_s)
    full_prompt = f"{prompt.prompt_text}\n\n{CONTEXT_MARKER}\n{jsonio.dumps(ctx)}"
    response = client.complete_structured(ModelRequest(
        agent_id="F", prompt_text=full_prompt, schema_id="flashtalk_v1"))
    if not response.valid:
        raise InvalidModelOutput("flashtalk output failed schema validation after retries")

    known = set(assets.asset_ids())
    sections = []
    for i, wire in enumerate(response.parsed.sections):
        image_ids = []
        for asset_id in wire.image_ids:
            if asset_id in known:
                image_ids.append(asset_id)
            else:
                # unknown reference policy: drop it, keep the script
                log.warning("flashtalk cited unknown asset %r; reference dropped", asset_id)
        sections.append(Section(
            kind=wire.kind,
            narration_text=wire.narration_text.strip(),
            assigned_image_ids=image_ids,
            order_index=i,
        ))
    assert [s.kind for s in sections] == list(SECTION_KINDS)

    target = float(response.parsed.target_duration_s)
    if not 60.0 <= target <= 180.0:
        clamped = min(180.0, max(60.0, target))
        log.warning("model target duration %.1fs outside [60, 180]; clamped to %.1fs", target, clamped)
        target = clamped
    return FlashtalkScript(sections=sections, target_duration_s=target)
