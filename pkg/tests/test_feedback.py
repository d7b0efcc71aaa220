from __future__ import annotations

import json
import os
import random

import cv2
import numpy as np
import pytest

from flashvid.compose import AUDIO_RATE, assemble_video, build_subscene_clip, silence_pcm, write_wav
from flashvid.errors import UnknownAgent
from flashvid.feedback import (
    BASE_ROUTING,
    FRAMES_PER_SECTION,
    FRAMES_PER_SUB_SCENE,
    metric_registry,
    reflect_prompt,
    route_records,
    routing_map,
    run_feedback_agent,
    run_feedback_iteration,
    set_metrics,
    summarize_feedback,
)
from flashvid.gateway import MockBackend, ModelClient, ScriptedBackend
from flashvid.prompts import SCHEMA_BEGIN, SCHEMA_END, extract_schema_block, initial_prompt
from flashvid.types import (
    FEEDBACK_AGENTS,
    GENERATION_AGENTS,
    SECTION_KINDS,
    AudioTrack,
    AvatarClip,
    FeedbackRecord,
    FlashtalkScript,
    FrameSet,
    ImageAsset,
    LayoutPlan,
    PaperAssets,
    PromptState,
    Scene,
    SceneDirectives,
    ScenePlan,
    Section,
    SubScene,
)


def _sub(sub_id="brief_context_1", duration=2.0) -> SubScene:
    return SubScene(sub_scene_id=sub_id, description="d", start_s=0.0,
                    duration_s=duration, images=[])


def _frame_set(tmp_path, n=2) -> FrameSet:
    paths = []
    for i in range(n):
        p = str(tmp_path / f"f{i}.png")
        cv2.imwrite(p, np.full((64, 36, 3), 40 * i, np.uint8))
        paths.append(p)
    return FrameSet(frames=paths, source_span=(0.0, 1.0), resolution=(36, 64))


class TestMetrics:
    def test_experiment_mode_single_headline_metric(self, config):
        expect = {"flashtalk": "Curiosity",
                  "sceneplan": "Visual Relevance and Clarity",
                  "text": "Key Information Coverage"}
        for agent, name in expect.items():
            metrics = set_metrics(_sub(), agent, config)
            assert [m.name for m in metrics] == [name]
            assert metrics[0].agent == agent and metrics[0].description

    def test_full_mode_uses_whole_registry(self, config):
        config.metric_mode = "full"
        for agent in FEEDBACK_AGENTS:
            metrics = set_metrics(_sub(), agent, config)
            assert sorted(m.name for m in metrics) == sorted(metric_registry()[agent])
            assert len(metrics) == 3

    def test_unknown_agent_rejected(self, config):
        with pytest.raises(UnknownAgent):
            set_metrics(_sub(), "narrator", config)

    def test_registry_returns_a_copy(self):
        registry = metric_registry()
        registry["flashtalk"]["Bogus"] = "x"
        assert "Bogus" not in metric_registry()["flashtalk"]


class TestFeedbackAgent:
    def test_one_record_per_metric(self, config, tmp_path):
        client = ModelClient(config)
        config.metric_mode = "full"
        metrics = set_metrics(_sub(), "sceneplan", config)
        records = run_feedback_agent("sceneplan", _frame_set(tmp_path),
                                     {"narration_slice": "hi"}, metrics, 1,
                                     "brief_context_1", client, config)
        assert len(records) == 3
        for record in records:
            assert record.iteration == 1
            assert record.agent == "sceneplan"
            assert record.sub_scene_id == "brief_context_1"
            assert 1 <= record.score <= 5
            assert record.comment
        assert {r.metric_name for r in records} == {m.name for m in metrics}

    def test_mismatched_metric_name_excluded(self, config, tmp_path):
        reply = json.dumps({"metric_name": "Some Other Metric", "score": 4, "comment": "ok"})
        client = ModelClient(config, backend=ScriptedBackend([reply]))
        metrics = set_metrics(_sub(), "flashtalk", config)
        records = run_feedback_agent("flashtalk", _frame_set(tmp_path), {}, metrics,
                                     1, "brief_context_1", client, config)
        assert records == []

    def test_invalid_reply_excluded_not_raised(self, config, tmp_path):
        client = ModelClient(
            config, backend=ScriptedBackend(["not json"] * config.retry_limit))
        metrics = set_metrics(_sub(), "text", config)
        records = run_feedback_agent("text", _frame_set(tmp_path), {}, metrics,
                                     1, "brief_context_1", client, config)
        assert records == []

    def test_bad_inputs_rejected(self, config, tmp_path):
        client = ModelClient(config)
        with pytest.raises(UnknownAgent):
            run_feedback_agent("critic", _frame_set(tmp_path), {}, [], 1, "x", client, config)
        with pytest.raises(ValueError):
            run_feedback_agent("text", _frame_set(tmp_path), {}, [], 1, "x", client, config)


def _record(agent: str, metric="M", score=3, iteration=1) -> FeedbackRecord:
    return FeedbackRecord(iteration=iteration, agent=agent, sub_scene_id="s_1",
                          metric_name=metric, score=score, comment=f"c-{agent}")


class TestRouting:
    def test_base_routes(self, config):
        assert BASE_ROUTING == {"flashtalk": ("F",), "sceneplan": ("S",), "text": ("T", "L")}
        assert routing_map(config) == BASE_ROUTING

    def test_effect_flag_widens_sceneplan_route(self, config):
        config.route_visual_feedback_to_effect = True
        routes = routing_map(config)
        assert routes["sceneplan"] == ("S", "E")
        assert routes["flashtalk"] == ("F",) and routes["text"] == ("T", "L")

    @pytest.mark.parametrize("widen", [False, True])
    def test_routing_sound_over_randomized_sets(self, config, widen):
        config.route_visual_feedback_to_effect = widen
        routes = routing_map(config)
        rng = random.Random(20240 + widen)
        for _ in range(100):
            records = [_record(rng.choice(FEEDBACK_AGENTS), metric=f"m{rng.randrange(4)}",
                               score=rng.randint(1, 5))
                       for _ in range(rng.randrange(0, 30))]
            routed = route_records(records, config)
            assert set(routed) == set(GENERATION_AGENTS)
            for record in records:
                reached = {a for a, batch in routed.items() if record in batch}
                assert reached == set(routes[record.agent])


class TestSummarize:
    def test_iteration_span_rejected(self, config):
        client = ModelClient(config, backend=ScriptedBackend([]))
        records = [_record("text", iteration=1), _record("text", iteration=2)]
        with pytest.raises(ValueError):
            summarize_feedback(records, client, config, 1)

    def test_empty_records_make_no_call(self, config):
        # an exhausted scripted backend raises on any call
        client = ModelClient(config, backend=ScriptedBackend([]))
        summary = summarize_feedback([], client, config, 2)
        assert summary.iteration == 2
        assert set(summary.per_agent) == set(GENERATION_AGENTS)
        for entry in summary.per_agent.values():
            assert entry.summary_text == "" and entry.record_count == 0

    def test_means_are_code_side_and_exact(self, config):
        client = ModelClient(config)
        records = [_record("flashtalk", metric="Curiosity", score=s) for s in (2, 4, 5)]
        records += [_record("text", metric="Clarity", score=1)]
        summary = summarize_feedback(records, client, config, 1)
        assert summary.per_agent["F"].metric_means == {"Curiosity": pytest.approx(11 / 3)}
        assert summary.per_agent["F"].record_count == 3
        for agent_id in ("T", "L"):
            assert summary.per_agent[agent_id].metric_means == {"Clarity": 1.0}
        assert summary.slice_for("F")
        assert summary.slice_for("B") == ""

    def test_invalid_summary_falls_back_to_digest(self, config):
        client = ModelClient(
            config, backend=ScriptedBackend(["nope"] * config.retry_limit))
        records = [_record("sceneplan", metric="Timing and Pacing", score=4)]
        summary = summarize_feedback(records, client, config, 1)
        text = summary.per_agent["S"].summary_text
        assert "mean Timing and Pacing 4.00" in text
        assert "c-sceneplan" in text

    def test_roundtrip_dict(self, config):
        client = ModelClient(config)
        summary = summarize_feedback([_record("flashtalk", iteration=3)], client, config, 3)
        from flashvid.feedback import FeedbackSummary

        again = FeedbackSummary.from_dict(summary.to_dict())
        assert again.to_dict() == summary.to_dict()


_PROMPT = ("You write punchy narration.\n"
           f"{SCHEMA_BEGIN}\n{{\"sections\": []}}\n{SCHEMA_END}\n"
           "Keep it short.")


class TestReflect:
    def test_empty_slice_is_identity_without_a_call(self, config):
        client = ModelClient(config, backend=ScriptedBackend([]))
        state = PromptState(agent_id="F", iteration=2, prompt_text=_PROMPT)
        advanced = reflect_prompt(state, "   ", client, config)
        assert advanced.iteration == 3
        assert advanced.prompt_text == _PROMPT

    def test_revision_with_schema_block_accepted(self, config):
        block = extract_schema_block(_PROMPT)
        revised = f"Sharper role.\n{block}\nNew guidance."
        client = ModelClient(config, backend=ScriptedBackend(
            [json.dumps({"revised_prompt": revised})]))
        state = PromptState(agent_id="F", iteration=0, prompt_text=_PROMPT)
        advanced = reflect_prompt(state, "be punchier", client, config)
        assert advanced.iteration == 1
        assert advanced.prompt_text == revised

    def test_dropped_block_retried_once_then_accepted(self, config):
        block = extract_schema_block(_PROMPT)
        bad = json.dumps({"revised_prompt": "no schema here"})
        good = json.dumps({"revised_prompt": f"Fixed.\n{block}"})
        client = ModelClient(config, backend=ScriptedBackend([bad, good]))
        state = PromptState(agent_id="S", iteration=1, prompt_text=_PROMPT)
        advanced = reflect_prompt(state, "tighten", client, config)
        assert block in advanced.prompt_text
        assert advanced.prompt_text.startswith("Fixed.")

    def test_block_lost_twice_keeps_old_text(self, config):
        bad = json.dumps({"revised_prompt": "still no schema"})
        client = ModelClient(config, backend=ScriptedBackend([bad, bad]))
        state = PromptState(agent_id="S", iteration=1, prompt_text=_PROMPT)
        advanced = reflect_prompt(state, "tighten", client, config)
        assert advanced.iteration == 2
        assert advanced.prompt_text == _PROMPT


def _assets(tmp_path) -> PaperAssets:
    shot = str(tmp_path / "shot.png")
    cv2.imwrite(shot, np.full((120, 160, 3), 80, np.uint8))
    first = ImageAsset("first_page", shot, "screenshot", 160, 120)
    return PaperAssets(paper_id="p", title="t", body_text=[], images=[first],
                       first_page=first, manifest_path=str(tmp_path / "m.json"))


class TestIterationLoop:
    @pytest.fixture
    def scenario(self, tmp_path, config):
        assets = _assets(tmp_path)
        scenes, clips, audio, sections = [], [], [], []
        for i, kind in enumerate(SECTION_KINDS):
            sub = SubScene(sub_scene_id=f"{kind}_1", description=f"shows {kind}",
                           start_s=0.0, duration_s=1.0, images=[])
            scenes.append(Scene(section_kind=kind, sub_scenes=[sub]))
            directives = SceneDirectives(sub_scene_id=sub.sub_scene_id,
                                         background="#000000", overlays=[],
                                         effects=[], layout=LayoutPlan(placements={}))
            clips.append(build_subscene_clip(directives, assets, sub, config))
            wav = str(tmp_path / f"{kind}.wav")
            write_wav(wav, silence_pcm(1.0, AUDIO_RATE), AUDIO_RATE)
            audio.append(AudioTrack(kind, wav, 1.0))
            sections.append(Section(kind=kind, narration_text=f"about {kind} twice over",
                                    assigned_image_ids=[], order_index=i))
        avatar = [AvatarClip(k, None, 0.0) for k in SECTION_KINDS]
        video = assemble_video(clips, audio, avatar, str(tmp_path / "v.avi"),
                               config, iteration=1)
        plan = ScenePlan(scenes=scenes)
        script = FlashtalkScript(sections=sections, target_duration_s=4.0)
        directives_by_id = {f"{k}_1": SceneDirectives(
            sub_scene_id=f"{k}_1", background="#000000", overlays=[], effects=[],
            layout=LayoutPlan(placements={})) for k in SECTION_KINDS}
        return video, plan, script, directives_by_id, audio, assets

    def test_full_iteration_records_and_prompt_advance(self, scenario, tmp_path, config):
        from flashvid.workdir import PaperWorkdir

        video, plan, script, directives_by_id, audio, _ = scenario
        workdir = PaperWorkdir(str(tmp_path / "work"), "p")
        client = ModelClient(config)
        prompts = {a: PromptState(a, 1, initial_prompt(a)) for a in GENERATION_AGENTS}

        next_prompts, records, summary = run_feedback_iteration(
            video, plan, script, directives_by_id, audio, prompts, client, config, workdir)

        # one record per (sub-scene, feedback agent, single experiment metric)
        assert len(records) == 4 * 3
        assert all(r.iteration == 1 for r in records)
        assert summary.iteration == 1

        log_path = os.path.join(workdir.iter_dir(1), "feedback.jsonl")
        with open(log_path, encoding="utf-8") as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
        assert [FeedbackRecord.from_dict(d) for d in lines] == records

        for agent_id in GENERATION_AGENTS:
            state = next_prompts[agent_id]
            assert state.iteration == 2
            assert extract_schema_block(state.prompt_text) == \
                extract_schema_block(prompts[agent_id].prompt_text)
            with open(workdir.prompt_path(agent_id, 2), encoding="utf-8") as fh:
                assert fh.read() == state.prompt_text

    def test_rerun_truncates_stale_log(self, scenario, tmp_path, config):
        from flashvid.workdir import PaperWorkdir

        video, plan, script, directives_by_id, audio, _ = scenario
        workdir = PaperWorkdir(str(tmp_path / "work"), "p")
        log_path = os.path.join(workdir.ensure("iter1"), "feedback.jsonl")
        with open(log_path, "w", encoding="utf-8") as fh:
            fh.write('{"stale": true}\n')
        client = ModelClient(config)
        prompts = {a: PromptState(a, 1, initial_prompt(a)) for a in GENERATION_AGENTS}
        _, records, _ = run_feedback_iteration(
            video, plan, script, directives_by_id, audio, prompts, client, config, workdir)
        with open(log_path, encoding="utf-8") as fh:
            lines = fh.read().strip().splitlines()
        assert len(lines) == len(records)

    def test_frame_budget_per_agent(self):
        assert FRAMES_PER_SECTION == 10
        assert FRAMES_PER_SUB_SCENE == 2
