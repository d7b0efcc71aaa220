"""Single-call baseline: the whole video plan from one model pass.

One request returns script, scene decomposition, and overlay text
together; no per-sub-scene agents run and no feedback loop follows.
Composition and evaluation reuse the standard modules so the resulting
video obeys the same duration and sync invariants as pipeline output.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

from .. import jsonio
from ..compose import assemble_video, build_subscene_clip
from ..config import PipelineConfig
from ..editing import DEFAULT_BACKGROUND, sanity_check
from ..editing.agents import _fallback_grid, overlays_from_wire
from ..errors import InvalidModelOutput
from ..evaluate import CONDITION_SINGLE, EvaluationReport, evaluate_video
from ..gateway import ModelClient, ModelRequest
from ..ingest import extract_assets, fetch_paper, load_assets
from ..planning import redistribute_images, synthesize_narration
from ..prompts import CONTEXT_MARKER
from ..types import (
    SECTION_KINDS,
    AvatarClip,
    FlashtalkScript,
    LayoutPlan,
    Scene,
    SceneDirectives,
    ScenePlan,
    Section,
    SubScene,
    TimedImage,
    VideoArtifact,
)
from ..workdir import PaperWorkdir, safe_paper_id
from .pipeline import CALL_LOG_NAME

log = logging.getLogger(__name__)

BASELINE_DIR = "baseline"

# the one-pass prompt: everything the specialized agents negotiate over
# several calls is demanded from a single reply here
BASELINE_PROMPT = """\
You produce a complete short-video plan for a research paper in a single reply.
Write a four-section script (aggressive_hook, brief_context, intriguing_teaser,
call_to_action, in that order), split every section into 1-5 described
sub-scenes with durations, place the paper's figures, and attach on-screen
text overlays with timing, color, and position. Reply with JSON only.
"""


@dataclass
class BaselineResult:
    paper_id: str
    video: VideoArtifact
    report: EvaluationReport


def _script_from_wire(wire_sections, assets) -> FlashtalkScript:
    known = set(assets.asset_ids())
    sections = []
    for i, wire in enumerate(wire_sections):
        image_ids = [a for a in wire.image_ids if a in known]
        dropped = [a for a in wire.image_ids if a not in known]
        if dropped:
            log.warning("baseline cited unknown assets %s; references dropped", dropped)
        sections.append(Section(kind=wire.kind, narration_text=wire.narration_text.strip(),
                                assigned_image_ids=image_ids, order_index=i))
    return FlashtalkScript(sections=sections, target_duration_s=120.0)


def run_baseline(source_ref: str, config: PipelineConfig) -> BaselineResult:
    """Generate, compose, and evaluate the one-pass baseline video.

    Args:
        source_ref: paper source (local file, URL, or identifier).
        config: validated pipeline config.

    Returns:
        BaselineResult whose report carries the single-agent condition
        label for aggregation against pipeline runs.
    """
    config.validate()
    paper_id = safe_paper_id(source_ref)
    workdir = PaperWorkdir(config.workdir, paper_id)
    workdir.ensure()
    client = ModelClient(config)
    client.set_log_sink(workdir.path(CALL_LOG_NAME))

    if os.path.exists(workdir.manifest_path):
        assets = load_assets(workdir.manifest_path)
    else:
        bundle = fetch_paper(source_ref, config.workdir, config)
        assets = extract_assets(bundle, config.workdir, config)

    ctx = {
        "title": assets.title,
        "abstract": assets.body_text[0][1][:600] if assets.body_text else "",
        "assets": [{"id": a.asset_id, "kind": a.kind, "caption": a.caption or ""}
                   for a in assets.images],
        "target_duration_s": config.target_duration_s,
    }
    response = client.complete_structured(ModelRequest(
        agent_id="F",
        prompt_text=f"{BASELINE_PROMPT}\n\n{CONTEXT_MARKER}\n{jsonio.dumps(ctx)}",
        schema_id="baseline_v1"))
    if not response.valid:
        raise InvalidModelOutput("baseline output failed schema validation after retries")

    script = _script_from_wire(response.parsed.sections, assets)
    wire_by_kind = {sc.section_kind: sc for sc in response.parsed.scenes}
    if set(wire_by_kind) != set(SECTION_KINDS):
        raise InvalidModelOutput(
            f"baseline must cover each section exactly once, got {sorted(wire_by_kind)}")

    base = workdir.ensure(BASELINE_DIR)
    audio_dir = workdir.ensure(BASELINE_DIR, "audio")
    audio = [synthesize_narration(s, config.tts_backend,
                                  os.path.join(audio_dir, f"{s.kind}.wav"))
             for s in script.sections]
    avatar = [AvatarClip(t.section_kind, None, t.duration_s) for t in audio]
    by_kind = {t.section_kind: t for t in audio}

    # rescale raw durations to real audio and conserve image placement,
    # exactly as the scene-planning agent's output is treated
    scenes: list[Scene] = []
    overlay_wires: dict[str, list] = {}
    for section in script.sections:
        wire_scene = wire_by_kind[section.kind]
        audio_d = by_kind[section.kind].duration_s
        raw_total = sum(ss.duration_s for ss in wire_scene.sub_scenes)
        scale = audio_d / raw_total
        subs = []
        start = 0.0
        for i, wire_ss in enumerate(wire_scene.sub_scenes):
            sub_id = f"{section.kind}_{i + 1}"
            duration = wire_ss.duration_s * scale
            subs.append(SubScene(sub_scene_id=sub_id, description=wire_ss.description.strip(),
                                 start_s=start, duration_s=duration,
                                 images=[TimedImage(a, duration) for a in wire_ss.image_ids]))
            overlay_wires[sub_id] = list(wire_ss.overlays)
            start += duration
        scenes.append(redistribute_images(Scene(section_kind=section.kind, sub_scenes=subs),
                                          section))
    plan = ScenePlan(scenes=scenes)

    directives: dict[str, SceneDirectives] = {}
    clips = []
    dir_dir = workdir.ensure(BASELINE_DIR, "directives")
    for scene in plan.scenes:
        for sub in scene.sub_scenes:
            overlays, clamps = overlays_from_wire(overlay_wires[sub.sub_scene_id],
                                                  sub.sub_scene_id, sub.duration_s)
            if clamps:
                log.warning("baseline overlay values clamped in %s: %s",
                            sub.sub_scene_id, ", ".join(clamps))
            image_ids = [t.asset_id for t in sub.images]
            grid = _fallback_grid(len(image_ids)) if image_ids else []
            d = SceneDirectives(
                sub_scene_id=sub.sub_scene_id,
                background=DEFAULT_BACKGROUND,
                overlays=overlays,
                effects=[],
                layout=LayoutPlan(placements=dict(zip(image_ids, grid))),
            )
            d, _ = sanity_check(d, sub.duration_s, config)
            directives[sub.sub_scene_id] = d
            jsonio.write_json(os.path.join(dir_dir, f"{sub.sub_scene_id}.json"), d.to_dict())
            clips.append(build_subscene_clip(d, assets, sub, config))

    jsonio.write_json(os.path.join(base, "flashtalk.json"), script.to_dict())
    jsonio.write_json(os.path.join(base, "sceneplan.json"), plan.to_dict())

    video = assemble_video(clips, audio, avatar, os.path.join(base, "video.avi"),
                           config, iteration=0)
    narration = " ".join(s.narration_text for s in script.sections)
    report = evaluate_video(video, client, config, paper_id,
                            os.path.join(base, "frames"),
                            narration_text=narration, condition=CONDITION_SINGLE)
    jsonio.write_json(os.path.join(base, "evaluation.json"), report.to_dict())
    return BaselineResult(paper_id=paper_id, video=video, report=report)
