"""End-to-end pipeline driver.

Per paper: one preprocess pass, then N iterations of
planning -> editing -> compose -> feedback -> evaluation.  Iteration j
generates with the prompts written for iteration j-1 and its feedback
pass writes the prompts for j.  Every stage persists its outputs and a
checksum record so a killed run resumes from the first unfinished stage
without re-executing (or altering) completed work.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Callable

from ..compose import assemble_video, build_subscene_clip
from ..config import PipelineConfig
from ..editing import build_sub_scene_directives
from ..editing.sanity import SanityReport
from ..errors import CorruptState
from ..evaluate import CONDITION_MULTI, EvaluationReport, aggregate_scores, evaluate_video, write_aggregate_csv
from ..feedback import run_feedback_iteration
from ..gateway import ModelClient
from ..ingest import extract_assets, fetch_paper, load_assets
from ..jsonio import read_json, write_json
from ..planning import generate_flashtalk, generate_sceneplan, render_avatar, synthesize_narration
from ..prompts import initial_prompt
from ..types import (
    GENERATION_AGENTS,
    SECTION_KINDS,
    AudioTrack,
    AvatarClip,
    FlashtalkScript,
    PaperAssets,
    PromptState,
    SceneDirectives,
    ScenePlan,
    VideoArtifact,
)
from ..workdir import PaperWorkdir, safe_paper_id
from .state import STAGES, RunState

log = logging.getLogger(__name__)

VIDEO_NAME = "video.avi"
CALL_LOG_NAME = "call_log.jsonl"

# hook(iteration, stage) called right before a stage executes; tests use
# it to inject mid-run kills.  None for the preprocess stage's iteration.
StageHook = Callable[[int | None, str], None]


@dataclass
class RunResult:
    paper_id: str
    videos: list[VideoArtifact]
    reports: list[EvaluationReport]
    manifest_path: str


# -- per-stage persistence helpers ---------------------------------------


def _rel(workdir: PaperWorkdir, path: str) -> str:
    return os.path.relpath(path, workdir.base)


def _load_prompts(workdir: PaperWorkdir, iteration: int) -> dict[str, PromptState]:
    prompts = {}
    for agent_id in GENERATION_AGENTS:
        path = workdir.prompt_path(agent_id, iteration)
        if not os.path.exists(path):
            raise CorruptState(f"missing prompt file {path}")
        with open(path, "r", encoding="utf-8") as fh:
            prompts[agent_id] = PromptState(agent_id, iteration, fh.read())
    return prompts


def _seed_initial_prompts(workdir: PaperWorkdir) -> list[str]:
    paths = []
    for agent_id in GENERATION_AGENTS:
        path = workdir.prompt_path(agent_id, 0)
        if not os.path.exists(path):
            os.makedirs(os.path.dirname(path), exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(initial_prompt(agent_id))
        paths.append(path)
    return paths


def _save_planning(workdir: PaperWorkdir, j: int, script: FlashtalkScript,
                   plan: ScenePlan, audio: list[AudioTrack],
                   avatar: list[AvatarClip]) -> list[str]:
    iter_dir = workdir.ensure(f"iter{j}")
    flashtalk_path = os.path.join(iter_dir, "flashtalk.json")
    sceneplan_path = os.path.join(iter_dir, "sceneplan.json")
    narration_path = os.path.join(iter_dir, "narration.json")
    write_json(flashtalk_path, script.to_dict())
    write_json(sceneplan_path, plan.to_dict())
    write_json(narration_path, {
        "audio": [{"section_kind": a.section_kind, "path": _rel(workdir, a.path),
                   "duration_s": a.duration_s} for a in audio],
        "avatar": [{"section_kind": a.section_kind,
                    "path": _rel(workdir, a.path) if a.path else None,
                    "duration_s": a.duration_s} for a in avatar],
    })
    artifacts = [flashtalk_path, sceneplan_path, narration_path]
    artifacts += [a.path for a in audio]
    artifacts += [a.path for a in avatar if a.path]
    return artifacts


def _load_planning(workdir: PaperWorkdir, j: int,
                   ) -> tuple[FlashtalkScript, ScenePlan, list[AudioTrack], list[AvatarClip]]:
    iter_dir = workdir.iter_dir(j)
    script = FlashtalkScript.from_dict(read_json(os.path.join(iter_dir, "flashtalk.json")))
    plan = ScenePlan.from_dict(read_json(os.path.join(iter_dir, "sceneplan.json")))
    meta = read_json(os.path.join(iter_dir, "narration.json"))
    audio = [AudioTrack(e["section_kind"], workdir.path(e["path"]), e["duration_s"])
             for e in meta["audio"]]
    avatar = [AvatarClip(e["section_kind"],
                         workdir.path(e["path"]) if e["path"] else None,
                         e["duration_s"])
              for e in meta["avatar"]]
    return script, plan, audio, avatar


def _save_editing(workdir: PaperWorkdir, j: int,
                  directives: dict[str, SceneDirectives],
                  reports: dict[str, SanityReport], order: list[str]) -> list[str]:
    dir_dir = workdir.ensure(f"iter{j}", "directives")
    artifacts = []
    for sub_id in order:
        path = os.path.join(dir_dir, f"{sub_id}.json")
        write_json(path, directives[sub_id].to_dict())
        artifacts.append(path)
    report_path = workdir.path(f"iter{j}", "sanity_report.json")
    write_json(report_path, {sid: reports[sid].to_dict() for sid in order})
    artifacts.append(report_path)
    return artifacts


def _load_editing(workdir: PaperWorkdir, j: int, plan: ScenePlan) -> dict[str, SceneDirectives]:
    directives = {}
    for _, sub in plan.all_sub_scenes():
        path = workdir.path(f"iter{j}", "directives", f"{sub.sub_scene_id}.json")
        directives[sub.sub_scene_id] = SceneDirectives.from_dict(read_json(path))
    return directives


def _save_compose(workdir: PaperWorkdir, j: int, video: VideoArtifact) -> list[str]:
    meta_path = workdir.path(f"iter{j}", "compose.json")
    write_json(meta_path, {
        "path": _rel(workdir, video.path),
        "duration_s": video.duration_s,
        "width_px": video.width_px,
        "height_px": video.height_px,
        "iteration": video.iteration,
    })
    return [video.path, meta_path]


def _load_compose(workdir: PaperWorkdir, j: int) -> VideoArtifact:
    meta = read_json(workdir.path(f"iter{j}", "compose.json"))
    return VideoArtifact(path=workdir.path(meta["path"]), duration_s=meta["duration_s"],
                         width_px=meta["width_px"], height_px=meta["height_px"],
                         iteration=meta["iteration"])


# -- stage bodies --------------------------------------------------------


def _run_planning(ctx, j: int):
    prompts = _load_prompts(ctx.workdir, j - 1)
    script = generate_flashtalk(ctx.assets, prompts["F"], ctx.client, ctx.config)
    audio_dir = ctx.workdir.ensure(f"iter{j}", "audio")
    avatar_dir = ctx.workdir.ensure(f"iter{j}", "avatar")
    audio, avatar = [], []
    for section in script.sections:
        track = synthesize_narration(section, ctx.config.tts_backend,
                                     os.path.join(audio_dir, f"{section.kind}.wav"))
        audio.append(track)
        avatar.append(render_avatar(section, track, ctx.config.avatar_backend,
                                    os.path.join(avatar_dir, f"{section.kind}.avi")))
    plan = generate_sceneplan(script, audio, prompts["S"], ctx.client, ctx.config)
    return script, plan, audio, avatar


def _run_editing(ctx, j: int, script: FlashtalkScript, plan: ScenePlan,
                 avatar: list[AvatarClip]):
    prompts = _load_prompts(ctx.workdir, j - 1)
    avatar_by_kind = {a.section_kind: a for a in avatar}
    directives: dict[str, SceneDirectives] = {}
    reports: dict[str, SanityReport] = {}
    order: list[str] = []
    for scene in plan.scenes:
        section = script.section(scene.section_kind)
        present = avatar_by_kind.get(scene.section_kind)
        avatar_present = bool(present and present.path)
        for sub in scene.sub_scenes:
            d, r = build_sub_scene_directives(sub, scene, section, ctx.assets, prompts,
                                              ctx.client, ctx.config, avatar_present)
            directives[sub.sub_scene_id] = d
            reports[sub.sub_scene_id] = r
            order.append(sub.sub_scene_id)
    return directives, reports, order


def _run_compose(ctx, j: int, plan: ScenePlan, directives: dict[str, SceneDirectives],
                 audio: list[AudioTrack], avatar: list[AvatarClip]) -> VideoArtifact:
    clips = []
    for kind in SECTION_KINDS:
        for scene in plan.scenes:
            if scene.section_kind != kind:
                continue
            for sub in scene.sub_scenes:
                clips.append(build_subscene_clip(directives[sub.sub_scene_id],
                                                 ctx.assets, sub, ctx.config))
    out_path = workdir_video_path(ctx.workdir, j)
    return assemble_video(clips, audio, avatar, out_path, ctx.config, iteration=j)


def workdir_video_path(workdir: PaperWorkdir, j: int) -> str:
    return os.path.join(workdir.ensure(f"iter{j}"), VIDEO_NAME)


def _run_feedback(ctx, j: int, video: VideoArtifact, plan: ScenePlan,
                  script: FlashtalkScript, directives: dict[str, SceneDirectives],
                  audio: list[AudioTrack]) -> list[str]:
    prompts = _load_prompts(ctx.workdir, j - 1)
    next_prompts, _, _ = run_feedback_iteration(
        video, plan, script, directives, audio, prompts, ctx.client, ctx.config, ctx.workdir)
    artifacts = [ctx.workdir.path(f"iter{j}", "feedback_summary.json")]
    fb_log = ctx.workdir.path(f"iter{j}", "feedback.jsonl")
    if os.path.exists(fb_log):
        artifacts.append(fb_log)
    artifacts += [ctx.workdir.prompt_path(a, j) for a in GENERATION_AGENTS]
    assert all(next_prompts[a].iteration == j for a in GENERATION_AGENTS)
    return artifacts


def _run_evaluation(ctx, j: int, video: VideoArtifact, script: FlashtalkScript) -> EvaluationReport:
    narration = " ".join(s.narration_text for s in script.sections)
    report = evaluate_video(video, ctx.client, ctx.config, ctx.workdir.paper_id,
                            ctx.workdir.path(f"iter{j}", "frames"),
                            narration_text=narration, condition=CONDITION_MULTI)
    write_json(ctx.workdir.path(f"iter{j}", "evaluation.json"), report.to_dict())
    return report


# -- driver --------------------------------------------------------------


class _RunContext:
    def __init__(self, workdir: PaperWorkdir, config: PipelineConfig,
                 client: ModelClient, assets: PaperAssets | None = None):
        self.workdir = workdir
        self.config = config
        self.client = client
        self.assets = assets


def _noop_hook(iteration, stage) -> None:
    return None


def _execute_stage(state: RunState, ctx: _RunContext, hook: StageHook,
                   iteration: int, stage: str, body):
    """Run one stage body with skip-if-done, failure marking, and the hook."""
    if state.is_done(iteration, stage):
        state.verify(iteration, stage)
        return None
    hook(iteration, stage)
    try:
        result = body()
    except Exception:
        state.mark_failed(iteration, stage)
        raise
    return result


def run_pipeline(source_ref: str, config: PipelineConfig,
                 stage_hook: StageHook | None = None) -> RunResult:
    """Run (or continue) the full pipeline for one paper.

    Args:
        source_ref: paper source (local file, URL, or identifier).
        config: validated pipeline config.
        stage_hook: optional callable invoked before each stage runs.

    Returns:
        RunResult with one video and one evaluation report per
        iteration and the path of the written run manifest.
    """
    config.validate()
    hook = stage_hook or _noop_hook
    paper_id = safe_paper_id(source_ref)
    workdir = PaperWorkdir(config.workdir, paper_id)
    workdir.ensure()
    state = RunState.load_or_create(workdir.state_path, workdir.base, paper_id,
                                    source_ref, config.content_hash())
    return _drive(state, workdir, config, hook)


def resume_pipeline(paper_id: str, config: PipelineConfig,
                    stage_hook: StageHook | None = None) -> RunResult:
    """Continue a previously started run from its persisted state."""
    config.validate()
    workdir = PaperWorkdir(config.workdir, paper_id)
    state = RunState.load(workdir.state_path, workdir.base)
    if state.data["paper_id"] != paper_id:
        raise CorruptState("state file does not match the requested paper")
    if state.data["config_hash"] != config.content_hash():
        raise CorruptState("config changed since the recorded run")
    return _drive(state, workdir, config, stage_hook or _noop_hook)


def _drive(state: RunState, workdir: PaperWorkdir, config: PipelineConfig,
           hook: StageHook) -> RunResult:
    client = ModelClient(config)
    client.set_log_sink(workdir.path(CALL_LOG_NAME))
    ctx = _RunContext(workdir, config, client)

    # preprocess: once per paper
    if state.is_done(None):
        state.verify(None)
        ctx.assets = load_assets(workdir.manifest_path)
    else:
        hook(None, "preprocess")
        try:
            bundle = fetch_paper(state.source_ref, config.workdir, config)
            ctx.assets = extract_assets(bundle, config.workdir, config)
        except Exception:
            state.mark_failed(None, None)
            raise
        artifacts = [workdir.manifest_path] + [a.path for a in ctx.assets.images]
        state.mark_done(None, None, artifacts)
    _seed_initial_prompts(workdir)

    videos: list[VideoArtifact] = []
    reports: list[EvaluationReport] = []
    for j in range(1, config.iterations + 1):
        script = plan = audio = avatar = directives = video = None

        result = _execute_stage(state, ctx, hook, j, "planning",
                                lambda: _run_planning(ctx, j))
        if result is not None:
            script, plan, audio, avatar = result
            state.mark_done(j, "planning", _save_planning(workdir, j, script, plan, audio, avatar))
        else:
            script, plan, audio, avatar = _load_planning(workdir, j)

        result = _execute_stage(state, ctx, hook, j, "editing",
                                lambda: _run_editing(ctx, j, script, plan, avatar))
        if result is not None:
            directives, sanity_reports, order = result
            state.mark_done(j, "editing", _save_editing(workdir, j, directives, sanity_reports, order))
        else:
            directives = _load_editing(workdir, j, plan)

        result = _execute_stage(state, ctx, hook, j, "compose",
                                lambda: _run_compose(ctx, j, plan, directives, audio, avatar))
        if result is not None:
            video = result
            state.mark_done(j, "compose", _save_compose(workdir, j, video))
        else:
            video = _load_compose(workdir, j)
        videos.append(video)

        result = _execute_stage(state, ctx, hook, j, "feedback",
                                lambda: _run_feedback(ctx, j, video, plan, script, directives, audio))
        if result is not None:
            state.mark_done(j, "feedback", result)

        result = _execute_stage(state, ctx, hook, j, "evaluation",
                                lambda: _run_evaluation(ctx, j, video, script))
        if result is not None:
            state.mark_done(j, "evaluation", [workdir.path(f"iter{j}", "evaluation.json")])
            reports.append(result)
        else:
            reports.append(EvaluationReport.from_dict(
                read_json(workdir.path(f"iter{j}", "evaluation.json"))))

    manifest_path = write_run_manifest(workdir, config)
    results_csv = os.path.join(config.workdir, "results", "aggregate.csv")
    write_aggregate_csv(aggregate_scores(reports, group_by=("condition", "iteration")),
                        results_csv)
    return RunResult(paper_id=workdir.paper_id, videos=videos, reports=reports,
                     manifest_path=manifest_path)


# bookkeeping files that change run-to-run (logs, state) or are model
# input caches (frames); everything else must be reproducible
_MANIFEST_EXCLUDE_NAMES = {"state.json", "run_manifest.json", CALL_LOG_NAME}
_MANIFEST_EXCLUDE_DIRS = {"frames"}


def write_run_manifest(workdir: PaperWorkdir, config: PipelineConfig) -> str:
    """Checksummed listing of every reproducible artifact of one paper."""
    from ..jsonio import dumps, sha256_file

    files = {}
    for root, dirs, names in os.walk(workdir.base):
        dirs[:] = sorted(d for d in dirs if d not in _MANIFEST_EXCLUDE_DIRS)
        for name in sorted(names):
            if name in _MANIFEST_EXCLUDE_NAMES:
                continue
            path = os.path.join(root, name)
            files[os.path.relpath(path, workdir.base)] = sha256_file(path)
    payload = {
        "schema_version": 1,
        "paper_id": workdir.paper_id,
        "config_hash": config.content_hash(),
        "files": files,
    }
    text = dumps(payload)
    path = workdir.run_manifest_path
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            if fh.read() == text:
                return path
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path
