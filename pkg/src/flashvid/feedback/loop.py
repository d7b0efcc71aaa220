"""One full feedback iteration: collect, summarize, reflect.

Loop structure: every sub-scene is judged by every feedback agent, so
one iteration attempts (number of sub-scenes) x (number of feedback
agents) metric sets.  After a barrier over all records, one summarize
call routes guidance per generation agent, then each prompt advances to
iteration j+1 (identity where its slice is empty).
"""

from __future__ import annotations

import logging
import os

from .. import jsonio
from ..config import PipelineConfig
from ..compose.frames import sample_frames
from ..errors import StageError
from ..gateway import ModelClient
from ..planning.narration import narration_slice
from ..types import (
    GENERATION_AGENTS,
    SECTION_KINDS,
    AudioTrack,
    FeedbackRecord,
    FlashtalkScript,
    PromptState,
    SceneDirectives,
    ScenePlan,
    VideoArtifact,
)
from ..workdir import PaperWorkdir
from .agents import FRAMES_PER_SECTION, FRAMES_PER_SUB_SCENE, run_feedback_agent
from .metrics import set_metrics
from .reflect import reflect_prompt
from .summarize import FeedbackSummary, summarize_feedback

log = logging.getLogger(__name__)

FEEDBACK_LOG_NAME = "feedback.jsonl"
SUMMARY_NAME = "feedback_summary.json"


def _overlay_digest(directives: SceneDirectives | None) -> list[dict]:
    if directives is None:
        return []
    return [
        {"content": o.content, "start_s": round(o.start_s, 3),
         "duration_s": round(o.duration_s, 3)}
        for o in directives.overlays
    ]


def run_feedback_iteration(video: VideoArtifact, plan: ScenePlan, script: FlashtalkScript,
                           directives_by_id: dict[str, SceneDirectives],
                           audio: list[AudioTrack], prompts: dict[str, PromptState],
                           client: ModelClient, config: PipelineConfig,
                           workdir: PaperWorkdir,
                           ) -> tuple[dict[str, PromptState], list[FeedbackRecord], FeedbackSummary]:
    """Collect feedback on iteration j's video and advance all prompts.

    Args:
        video: the assembled video for iteration j.
        plan: its scene plan.
        script: its flash-talk script (narration per section).
        directives_by_id: sub_scene_id -> directives, for context.
        audio: narration tracks (section timeline authority).
        prompts: PromptState per generation agent at iteration j.
        client: gateway client.
        config: pipeline config.
        workdir: persistence root (feedback log, summary, prompt files).

    Returns:
        (prompts at j+1, collected records, the summary).  A sub-scene
        whose frames or feedback calls fail is skipped with a log
        entry; the iteration always completes.
    """
    iteration = video.iteration
    iter_dir = workdir.ensure(f"iter{iteration}")
    frames_dir = workdir.ensure(f"iter{iteration}", "frames")
    feedback_log = os.path.join(iter_dir, FEEDBACK_LOG_NAME)
    # truncate any partial log from an interrupted earlier attempt
    if os.path.exists(feedback_log):
        os.remove(feedback_log)

    tracks = {a.section_kind: a for a in audio}
    records: list[FeedbackRecord] = []

    section_start = 0.0
    for scene in plan.scenes:
        if scene.section_kind not in tracks:
            log.warning("no narration track for %s; its sub-scenes are skipped", scene.section_kind)
            continue
        section = script.section(scene.section_kind)
        track = tracks[scene.section_kind]
        section_end = min(section_start + track.duration_s, video.duration_s)
        scene_total = sum(ss.duration_s for ss in scene.sub_scenes)

        try:
            section_frames = sample_frames(
                video, (section_start, section_end), FRAMES_PER_SECTION,
                frames_dir, prefix=f"fb_{scene.section_kind}")
        except StageError as exc:
            log.warning("section frames failed for %s (%s); its sub-scenes are skipped",
                        scene.section_kind, exc)
            section_start = section_start + track.duration_s
            continue

        for sub in scene.sub_scenes:
            sub_start = min(section_start + sub.start_s, video.duration_s)
            sub_end = min(sub_start + sub.duration_s, video.duration_s)
            slice_text = narration_slice(section.narration_text, sub.start_s,
                                         sub.duration_s, scene_total)
            context = {
                "section_kind": scene.section_kind,
                "sub_scene_id": sub.sub_scene_id,
                "description": sub.description,
                "narration_slice": slice_text,
                "narration_text": section.narration_text,
                "overlays": _overlay_digest(directives_by_id.get(sub.sub_scene_id)),
            }
            try:
                sub_frames = sample_frames(
                    video, (sub_start, sub_end), FRAMES_PER_SUB_SCENE,
                    frames_dir, prefix=f"fb_{sub.sub_scene_id}")
            except StageError as exc:
                log.warning("frames failed for %s (%s); skipped", sub.sub_scene_id, exc)
                continue
            for agent in ("flashtalk", "sceneplan", "text"):
                frames = section_frames if agent == "flashtalk" else sub_frames
                metrics = set_metrics(sub, agent, config)
                try:
                    batch = run_feedback_agent(agent, frames, context, metrics,
                                               iteration, sub.sub_scene_id, client, config)
                except StageError as exc:
                    log.warning("feedback agent %s failed on %s (%s); skipped",
                                agent, sub.sub_scene_id, exc)
                    continue
                for record in batch:
                    jsonio.append_jsonl(feedback_log, record.to_dict())
                records.extend(batch)
        section_start = section_start + track.duration_s

    summary = summarize_feedback(records, client, config, iteration)
    jsonio.write_json(os.path.join(iter_dir, SUMMARY_NAME), summary.to_dict())

    next_prompts: dict[str, PromptState] = {}
    for agent_id in GENERATION_AGENTS:
        state = prompts[agent_id]
        advanced = reflect_prompt(state, summary.slice_for(agent_id), client, config)
        next_prompts[agent_id] = advanced
        path = workdir.prompt_path(agent_id, advanced.iteration)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(advanced.prompt_text)
    return next_prompts, records, summary
