from __future__ import annotations

import hashlib
import json
import os
from types import SimpleNamespace

import pytest
from conftest import quick_config, write_html_paper

from flashvid.compose import video_info
from flashvid.config import PipelineConfig, load_config
from flashvid.errors import CorruptState, PipelineError
from flashvid.evaluate import CONDITION_MULTI, CONDITION_SINGLE, METRIC_KEYS
from flashvid.orchestrator import (
    STAGES,
    RunState,
    main,
    resume_pipeline,
    run_baseline,
    run_pipeline,
    write_run_manifest,
)
from flashvid.types import GENERATION_AGENTS
from flashvid.workdir import PaperWorkdir


class TestRunState:
    def _state(self, tmp_path) -> RunState:
        return RunState.load_or_create(str(tmp_path / "state.json"), str(tmp_path),
                                       "p", "src.html", "h1")

    def test_create_then_load(self, tmp_path):
        state = self._state(tmp_path)
        again = RunState.load(state.path, str(tmp_path))
        assert again.data == state.data
        assert again.source_ref == "src.html"

    def test_load_missing_rejected(self, tmp_path):
        with pytest.raises(CorruptState):
            RunState.load(str(tmp_path / "nope.json"), str(tmp_path))

    def test_reopen_checks_identity(self, tmp_path):
        self._state(tmp_path)
        with pytest.raises(CorruptState):
            RunState.load_or_create(str(tmp_path / "state.json"), str(tmp_path),
                                    "other", "src.html", "h1")
        with pytest.raises(CorruptState):
            RunState.load_or_create(str(tmp_path / "state.json"), str(tmp_path),
                                    "p", "src.html", "h2")

    def test_stage_order_is_monotone(self, tmp_path):
        state = self._state(tmp_path)
        with pytest.raises(CorruptState):
            state.mark_done(1, "compose", [])
        state.mark_done(1, "planning", [])
        with pytest.raises(CorruptState):
            state.mark_done(1, "feedback", [])
        state.mark_done(1, "editing", [])
        state.mark_done(1, "compose", [])
        assert state.is_done(1, "compose")
        # a later iteration starts its own ladder
        with pytest.raises(CorruptState):
            state.mark_done(2, "editing", [])

    def test_preprocess_slot_has_no_ladder(self, tmp_path):
        state = self._state(tmp_path)
        art = tmp_path / "a.bin"
        art.write_bytes(b"x")
        state.mark_done(None, None, [str(art)])
        assert state.is_done(None)
        state.verify(None)

    def test_verify_catches_tamper_and_loss(self, tmp_path):
        state = self._state(tmp_path)
        art = tmp_path / "a.bin"
        art.write_bytes(b"x")
        state.mark_done(1, "planning", [str(art)])
        state.verify(1, "planning")
        art.write_bytes(b"y")
        with pytest.raises(CorruptState, match="checksum mismatch"):
            state.verify(1, "planning")
        art.unlink()
        with pytest.raises(CorruptState, match="missing"):
            state.verify(1, "planning")

    def test_mark_failed(self, tmp_path):
        state = self._state(tmp_path)
        state.mark_failed(1, "planning")
        assert state.status(1, "planning") == "failed"
        assert not state.is_done(1, "planning")

    def test_unknown_stage_rejected(self, tmp_path):
        state = self._state(tmp_path)
        with pytest.raises(ValueError):
            state.status(1, "render")


class TestConfig:
    def test_yaml_sections_map_to_fields(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "iterations: 2\n"
            "seed: 7\n"
            f"workdir: {tmp_path}/w\n"
            "backend:\n  name: mock\n  temperatures: [0.5, 0.8]\n  retry_limit: 2\n"
            "video:\n  canvas: 270x480\n  fps: 15\n  target_duration_s: 60\n"
            "feedback:\n  metric_mode: full\n  route_visual_to_effect: true\n")
        config = load_config(str(path))
        assert config.iterations == 2 and config.seed == 7
        assert config.temperatures == (0.5, 0.8) and config.retry_limit == 2
        assert config.canvas == (270, 480) and config.fps == 15
        assert config.target_duration_s == 60.0
        assert config.metric_mode == "full"
        assert config.route_visual_feedback_to_effect is True

    def test_overrides_beat_file(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("iterations: 2\n")
        config = load_config(str(path), overrides={"iterations": 4})
        assert config.iterations == 4
        with pytest.raises(PipelineError):
            load_config(str(path), overrides={"iteration_count": 4})

    @pytest.mark.parametrize("field,value", [
        ("iterations", 0),
        ("codec_profile", "h264"),
        ("metric_mode", "both"),
        ("target_duration_s", 30.0),
        ("avatar_backend", "live"),
    ])
    def test_validate_bounds(self, field, value):
        config = PipelineConfig()
        setattr(config, field, value)
        with pytest.raises(PipelineError):
            config.validate()

    def test_content_hash_ignores_warnings(self):
        a, b = PipelineConfig(), PipelineConfig()
        b.warnings.append("noted")
        assert a.content_hash() == b.content_hash()
        b.seed = 99
        assert a.content_hash() != b.content_hash()


@pytest.fixture(scope="module")
def pipeline_env(tmp_path_factory):
    root = tmp_path_factory.mktemp("orc")
    src = write_html_paper(str(root / "fixture"))
    config = quick_config(str(root / "work"), iterations=2)
    hooked = []
    result = run_pipeline(src, config, stage_hook=lambda i, s: hooked.append((i, s)))
    return SimpleNamespace(root=root, src=src, config=config,
                           result=result, hooked=hooked,
                           workdir=PaperWorkdir(config.workdir, result.paper_id))


def _digest_tree(base: str, prefix: str = "") -> dict[str, str]:
    out = {}
    for dirpath, _, names in os.walk(base):
        for name in names:
            path = os.path.join(dirpath, name)
            rel = os.path.relpath(path, base)
            if rel.startswith(prefix):
                with open(path, "rb") as fh:
                    out[rel] = hashlib.sha256(fh.read()).hexdigest()
    return out


class TestPipelineRun:
    def test_result_shape(self, pipeline_env):
        result = pipeline_env.result
        assert result.paper_id == "paper"
        assert [v.iteration for v in result.videos] == [1, 2]
        assert [r.iteration for r in result.reports] == [1, 2]
        assert all(r.condition == CONDITION_MULTI for r in result.reports)

    def test_videos_decode_at_config_geometry(self, pipeline_env):
        for video in pipeline_env.result.videos:
            frames, fps, w, h = video_info(video.path)
            assert (w, h) == pipeline_env.config.canvas
            assert fps == pipeline_env.config.fps
            assert frames / fps == pytest.approx(video.duration_s, abs=1e-9)

    def test_stage_hook_saw_every_stage_once(self, pipeline_env):
        expected = [(None, "preprocess")]
        expected += [(j, s) for j in (1, 2) for s in STAGES]
        assert pipeline_env.hooked == expected

    def test_prompt_lineage_files(self, pipeline_env):
        for agent_id in GENERATION_AGENTS:
            for iteration in range(pipeline_env.config.iterations + 1):
                path = pipeline_env.workdir.prompt_path(agent_id, iteration)
                assert os.path.exists(path), path
            absent = pipeline_env.workdir.prompt_path(agent_id, 3)
            assert not os.path.exists(absent)

    def test_state_records_everything_done(self, pipeline_env):
        with open(pipeline_env.workdir.state_path, encoding="utf-8") as fh:
            state = json.load(fh)
        assert state["preprocess"]["status"] == "done"
        for j in ("1", "2"):
            for stage in STAGES:
                assert state["iterations"][j]["stages"][stage]["status"] == "done"

    def test_run_manifest_covers_reproducible_files(self, pipeline_env):
        with open(pipeline_env.result.manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        assert manifest["paper_id"] == "paper"
        assert manifest["config_hash"] == pipeline_env.config.content_hash()
        files = manifest["files"]
        assert files and list(files) == sorted(files)
        for rel, digest in files.items():
            assert not rel.startswith("frames/") and "/frames/" not in rel
            assert os.path.basename(rel) not in {"state.json", "run_manifest.json",
                                                 "call_log.jsonl"}
            path = os.path.join(pipeline_env.workdir.base, rel)
            with open(path, "rb") as fh:
                assert hashlib.sha256(fh.read()).hexdigest() == digest, rel

    def test_manifest_rewrite_is_stable(self, pipeline_env):
        with open(pipeline_env.result.manifest_path, encoding="utf-8") as fh:
            before = fh.read()
        write_run_manifest(pipeline_env.workdir, pipeline_env.config)
        with open(pipeline_env.result.manifest_path, encoding="utf-8") as fh:
            assert fh.read() == before

    def test_call_log_entries_are_structured(self, pipeline_env):
        log_path = pipeline_env.workdir.path("call_log.jsonl")
        with open(log_path, encoding="utf-8") as fh:
            entries = [json.loads(line) for line in fh if line.strip()]
        assert entries
        for entry in entries:
            assert {"agent_id", "schema_id", "temperature", "attempts", "valid",
                    "n_images", "prompt_sha256"} <= set(entry)

    def test_aggregate_csv_written(self, pipeline_env):
        csv_path = os.path.join(pipeline_env.config.workdir, "results", "aggregate.csv")
        with open(csv_path, encoding="utf-8") as fh:
            lines = fh.read().strip().splitlines()
        # 2 iterations x 10 metrics plus the header
        assert len(lines) == 1 + 2 * len(METRIC_KEYS)

    def test_resume_of_finished_run_executes_nothing(self, pipeline_env):
        before = _digest_tree(pipeline_env.workdir.base, prefix="iter")
        resumed = []
        result = resume_pipeline("paper", pipeline_env.config,
                                 stage_hook=lambda i, s: resumed.append((i, s)))
        assert resumed == []
        assert len(result.videos) == 2 and len(result.reports) == 2
        assert _digest_tree(pipeline_env.workdir.base, prefix="iter") == before


class _Kill(RuntimeError):
    pass


class TestKillAndResume:
    def test_resume_continues_from_killed_stage(self, tmp_path):
        src = write_html_paper(str(tmp_path / "fixture"))
        config = quick_config(str(tmp_path / "work"), iterations=2)

        def killer(iteration, stage):
            if iteration == 2 and stage == "compose":
                raise _Kill

        with pytest.raises(_Kill):
            run_pipeline(src, config, stage_hook=killer)

        workdir = PaperWorkdir(config.workdir, "paper")
        with open(workdir.state_path, encoding="utf-8") as fh:
            state = json.load(fh)
        assert state["iterations"]["1"]["stages"]["evaluation"]["status"] == "done"
        assert state["iterations"]["2"]["stages"]["editing"]["status"] == "done"
        # the kill fired before the stage body: no status was recorded
        assert state["iterations"]["2"]["stages"].get("compose", {}).get("status") != "done"

        before = _digest_tree(workdir.base, prefix="iter1")
        resumed = []
        result = resume_pipeline("paper", config,
                                 stage_hook=lambda i, s: resumed.append((i, s)))
        assert resumed == [(2, "compose"), (2, "feedback"), (2, "evaluation")]
        assert len(result.videos) == 2 and len(result.reports) == 2
        assert _digest_tree(workdir.base, prefix="iter1") == before

        # artifact tamper is caught, not silently regenerated
        target = workdir.path("iter1", "flashtalk.json")
        with open(target, encoding="utf-8") as fh:
            original = fh.read()
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(original.replace("{", "{ ", 1))
        with pytest.raises(CorruptState, match="checksum mismatch"):
            resume_pipeline("paper", config)
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(original)

        drifted = quick_config(str(tmp_path / "work"), iterations=2, seed=777)
        with pytest.raises(CorruptState, match="config changed"):
            resume_pipeline("paper", drifted)

        with pytest.raises(CorruptState):
            resume_pipeline("otherpaper", config)


@pytest.fixture(scope="module")
def baseline_env(tmp_path_factory):
    root = tmp_path_factory.mktemp("base")
    src = write_html_paper(str(root / "fixture"))
    config = quick_config(str(root / "work"))
    result = run_baseline(src, config)
    return SimpleNamespace(root=root, config=config, result=result,
                           workdir=PaperWorkdir(config.workdir, result.paper_id))


class TestBaseline:
    def test_single_generation_call(self, baseline_env):
        log_path = baseline_env.workdir.path("call_log.jsonl")
        with open(log_path, encoding="utf-8") as fh:
            entries = [json.loads(line) for line in fh if line.strip()]
        generation = [e for e in entries if e["agent_id"] in GENERATION_AGENTS]
        assert len(generation) == 1
        assert generation[0]["agent_id"] == "F"
        assert generation[0]["schema_id"] == "baseline_v1"
        assert {e["schema_id"] for e in entries} <= {"baseline_v1", "evaluation_v1"}

    def test_video_and_report(self, baseline_env):
        video = baseline_env.result.video
        frames, fps, w, h = video_info(video.path)
        assert frames > 0 and (w, h) == baseline_env.config.canvas
        report = baseline_env.result.report
        assert report.condition == CONDITION_SINGLE
        assert report.iteration == 0

    def test_artifacts_persisted(self, baseline_env):
        base = baseline_env.workdir.path("baseline")
        for name in ("flashtalk.json", "sceneplan.json", "evaluation.json", "video.avi"):
            assert os.path.exists(os.path.join(base, name)), name
        directives = os.listdir(os.path.join(base, "directives"))
        assert directives and all(name.endswith(".json") for name in directives)


@pytest.fixture(scope="module")
def cli_env(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    src = write_html_paper(str(root / "fixture"))
    cfg = root / "cfg.yaml"
    cfg.write_text(
        "iterations: 1\n"
        f"workdir: {root}/work\n"
        "video:\n  canvas: 270x480\n  fps: 15\n  target_duration_s: 60\n")
    return SimpleNamespace(root=root, src=src, cfg=str(cfg))


class TestCli:
    def test_run_resume_baseline_evaluate_report(self, cli_env):
        assert main(["run", "--source", cli_env.src, "--config", cli_env.cfg]) == 0
        assert main(["resume", "--paper", "paper", "--config", cli_env.cfg]) == 0
        assert main(["baseline", "--source", cli_env.src, "--config", cli_env.cfg]) == 0

        video = os.path.join(str(cli_env.root), "work", "paper", "iter1", "video.avi")
        assert main(["evaluate", "--video", video, "--config", cli_env.cfg]) == 0
        assert os.path.exists(video + ".evaluation.json")

        out = os.path.join(str(cli_env.root), "results")
        assert main(["report", "--out", out, "--config", cli_env.cfg]) == 0
        with open(os.path.join(out, "aggregate.csv"), encoding="utf-8") as fh:
            lines = fh.read().strip().splitlines()
        conditions = {line.split(",")[0] for line in lines[1:]}
        assert conditions == {CONDITION_MULTI, CONDITION_SINGLE}

    def test_usage_errors_exit_one(self, cli_env):
        assert main(["run"]) == 1  # --source is required
        assert main(["no-such-command"]) == 1
        assert main(["evaluate", "--video", "/nonexistent.avi"]) == 1

    def test_pipeline_errors_exit_two(self, cli_env):
        assert main(["resume", "--paper", "missing", "--config", cli_env.cfg]) == 2

    def test_backend_errors_exit_three(self, cli_env, tmp_path):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text(
            "iterations: 1\n"
            f"workdir: {tmp_path}/work\n"
            "tts:\n  backend: missing\n"
            "video:\n  canvas: 270x480\n  fps: 15\n  target_duration_s: 60\n")
        assert main(["run", "--source", cli_env.src, "--config", str(cfg)]) == 3
