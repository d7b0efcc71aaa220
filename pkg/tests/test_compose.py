from __future__ import annotations

import os

import cv2
import numpy as np
import pytest

from flashvid.compose import (
    AUDIO_RATE,
    MODEL_FRAME_SIZE,
    assemble_video,
    build_subscene_clip,
    sample_frames,
    silence_pcm,
    video_info,
    wav_duration,
    write_wav,
)
from flashvid.compose.avi import encode_frame, read_wav, write_avi
from flashvid.errors import DurationMismatch, EncodeError, SpanOutOfRange
from flashvid.types import (
    AudioTrack,
    AvatarClip,
    EffectSpec,
    ImageAsset,
    LayoutPlan,
    PaperAssets,
    SceneDirectives,
    SubScene,
    TextOverlay,
    TimedImage,
    VideoArtifact,
)


def _flat_image(path: str, bgr, size=(120, 160)) -> None:
    img = np.zeros((*size, 3), np.uint8)
    img[:] = bgr
    cv2.imwrite(path, img)


def _assets(tmp_path) -> PaperAssets:
    fig = str(tmp_path / "white.png")
    _flat_image(fig, (255, 255, 255))
    shot = str(tmp_path / "shot.png")
    _flat_image(shot, (90, 90, 90))
    images = [ImageAsset("fig_1", fig, "figure", 160, 120),
              ImageAsset("first_page", shot, "screenshot", 160, 120)]
    return PaperAssets(paper_id="p", title="t", body_text=[], images=images,
                       first_page=images[1], manifest_path=str(tmp_path / "m.json"))


def _sub(duration=2.0, images=("fig_1",)) -> SubScene:
    return SubScene(sub_scene_id="brief_context_1", description="d", start_s=0.0,
                    duration_s=duration,
                    images=[TimedImage(a, duration) for a in images])


def _directives(placements=None, overlays=(), effects=(),
                sub_scene_id="brief_context_1") -> SceneDirectives:
    return SceneDirectives(sub_scene_id=sub_scene_id, background="#000000",
                           overlays=list(overlays), effects=list(effects),
                           layout=LayoutPlan(placements=placements or {}))


class TestAviContainer:
    def _frames(self, n, w=64, h=48, profile="production"):
        out = []
        for i in range(n):
            img = np.full((h, w, 3), i * 9 % 255, np.uint8)
            out.append(encode_frame(img, profile))
        return out

    def test_roundtrip_counts(self, tmp_path):
        path = str(tmp_path / "v.avi")
        write_avi(path, self._frames(30), 64, 48, 15, b"MJPG",
                  pcm=silence_pcm(2.0, AUDIO_RATE), rate=AUDIO_RATE)
        frames, fps, w, h = video_info(path)
        assert (frames, fps, w, h) == (30, 15.0, 64, 48)

    def test_lossless_profile_roundtrips_pixels(self, tmp_path):
        rng = np.random.default_rng(5)
        frame = rng.integers(0, 256, (48, 64, 3), np.uint8)
        path = str(tmp_path / "v.avi")
        write_avi(path, [encode_frame(frame, "lossless_test")], 64, 48, 15, b"png ")
        cap = cv2.VideoCapture(path)
        ok, got = cap.read()
        cap.release()
        assert ok
        assert np.array_equal(got, frame)

    def test_writes_are_byte_deterministic(self, tmp_path):
        a, b = str(tmp_path / "a.avi"), str(tmp_path / "b.avi")
        frames = self._frames(10)
        pcm = silence_pcm(10 / 15, AUDIO_RATE)
        write_avi(a, frames, 64, 48, 15, b"MJPG", pcm=pcm, rate=AUDIO_RATE)
        write_avi(b, frames, 64, 48, 15, b"MJPG", pcm=pcm, rate=AUDIO_RATE)
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_wav_roundtrip(self, tmp_path):
        path = str(tmp_path / "a.wav")
        pcm = silence_pcm(1.25, AUDIO_RATE)
        write_wav(path, pcm, AUDIO_RATE)
        got, rate = read_wav(path)
        assert rate == AUDIO_RATE and got == pcm
        # duration is quantized to whole samples
        assert wav_duration(path) == pytest.approx(1.25, abs=1.0 / AUDIO_RATE)


class TestClipRendering:
    def test_background_fills_canvas(self, tmp_path, config):
        clip = build_subscene_clip(_directives(), _assets(tmp_path), _sub(images=()), config)
        frame = clip.render_at(0.5)
        assert frame.shape == (480, 270, 3)
        assert int(frame.max()) == 0

    def test_image_lands_in_its_placement(self, tmp_path, config):
        d = _directives(placements={"fig_1": (0.25, 0.25, 0.5, 0.25)})
        clip = build_subscene_clip(d, _assets(tmp_path), _sub(), config)
        frame = clip.render_at(0.1)
        ys, xs = np.nonzero(frame[:, :, 0] > 200)
        assert xs.min() == pytest.approx(0.25 * 270, abs=2)
        assert xs.max() == pytest.approx(0.75 * 270, abs=2)
        assert ys.min() == pytest.approx(0.25 * 480, abs=2)

    def test_unplaced_image_not_drawn(self, tmp_path, config):
        clip = build_subscene_clip(_directives(), _assets(tmp_path), _sub(), config)
        assert int(clip.render_at(0.1).max()) == 0

    def test_overlay_visible_only_in_window(self, tmp_path, config):
        overlay = TextOverlay(overlay_id="brief_context_1_txt1", content="HELLO",
                              font_size_pt=40, color="#ffffff",
                              position=(0.1, 0.4, 0.8, 0.2), start_s=0.5, duration_s=1.0)
        clip = build_subscene_clip(_directives(overlays=[overlay]), _assets(tmp_path),
                                   _sub(images=()), config)
        assert int(clip.render_at(0.2).max()) == 0
        assert int(clip.render_at(1.0).max()) > 200
        assert int(clip.render_at(1.8).max()) == 0

    def test_zoom_in_bbox_ratio_matches_magnitude(self, tmp_path, config):
        rect = (0.25, 0.3, 0.5, 0.25)
        fx = EffectSpec(kind="zoom_in", target_component_id="fig_1",
                        start_s=0.0, duration_s=2.0, magnitude=1.3)
        d = _directives(placements={"fig_1": rect}, effects=[fx])
        clip = build_subscene_clip(d, _assets(tmp_path), _sub(), config)

        def width_at(t):
            xs = np.nonzero(clip.render_at(t)[:, :, 0] > 200)[1]
            return xs.max() - xs.min() + 1

        ratio = width_at(1.999) / width_at(0.0)
        assert ratio == pytest.approx(1.3, abs=0.03)

    def test_zoom_holds_final_state_after_window(self, tmp_path, config):
        fx = EffectSpec(kind="zoom_in", target_component_id="fig_1",
                        start_s=0.0, duration_s=1.0, magnitude=1.3)
        d = _directives(placements={"fig_1": (0.25, 0.3, 0.5, 0.25)}, effects=[fx])
        clip = build_subscene_clip(d, _assets(tmp_path), _sub(), config)
        assert np.array_equal(clip.render_at(1.2), clip.render_at(1.8))

    def test_fade_in_brightness_monotone(self, tmp_path, config):
        fx = EffectSpec(kind="fade_in", target_component_id="fig_1",
                        start_s=0.0, duration_s=2.0, magnitude=1.0)
        d = _directives(placements={"fig_1": (0.25, 0.3, 0.5, 0.25)}, effects=[fx])
        clip = build_subscene_clip(d, _assets(tmp_path), _sub(), config)
        means = [clip.render_at(t).mean() for t in (0.01, 0.7, 1.4, 1.99)]
        assert means == sorted(means)
        assert means[0] < means[-1] * 0.2

    def test_frame_count_rounds(self, tmp_path, config):
        clip = build_subscene_clip(_directives(), _assets(tmp_path),
                                   _sub(duration=1.03, images=()), config)
        assert clip.frame_count(15) == round(1.03 * 15)


def _audio_for(tmp_path, kind: str, seconds: float) -> AudioTrack:
    path = str(tmp_path / f"{kind}.wav")
    write_wav(path, silence_pcm(seconds, AUDIO_RATE), AUDIO_RATE)
    return AudioTrack(section_kind=kind, path=path, duration_s=wav_duration(path))


def _clips_for(tmp_path, config, kinds_durations):
    assets = _assets(tmp_path)
    clips = []
    for kind, durations in kinds_durations:
        for i, d in enumerate(durations):
            sub_id = f"{kind}_{i + 1}"
            sub = SubScene(sub_scene_id=sub_id, description="d",
                           start_s=0.0, duration_s=d, images=[])
            clips.append(build_subscene_clip(_directives(sub_scene_id=sub_id),
                                             assets, sub, config))
    return clips


KINDS = ("aggressive_hook", "brief_context", "intriguing_teaser", "call_to_action")


class TestAssemble:
    def test_duration_matches_audio_sum(self, tmp_path, config):
        audio = [_audio_for(tmp_path, k, 1.0 + 0.4 * i) for i, k in enumerate(KINDS)]
        clips = _clips_for(tmp_path, config,
                           [(k, [a.duration_s / 2, a.duration_s / 2])
                            for k, a in zip(KINDS, audio)])
        avatar = [AvatarClip(k, None, 0.0) for k in KINDS]
        video = assemble_video(clips, audio, avatar, str(tmp_path / "v.avi"), config)
        total_audio = sum(a.duration_s for a in audio)
        assert abs(video.duration_s - total_audio) <= 0.5
        frames, fps, w, h = video_info(video.path)
        assert (w, h) == config.canvas
        assert frames / fps == pytest.approx(video.duration_s, abs=1e-9)

    def test_fps_must_divide_audio_rate(self, tmp_path, config):
        config.fps = 16  # 22050 / 16 is fractional
        audio = [_audio_for(tmp_path, k, 1.0) for k in KINDS]
        clips = _clips_for(tmp_path, config, [(k, [1.0]) for k in KINDS])
        avatar = [AvatarClip(k, None, 0.0) for k in KINDS]
        with pytest.raises(EncodeError):
            assemble_video(clips, audio, avatar, str(tmp_path / "v.avi"), config)

    def test_clip_total_off_audio_rejected(self, tmp_path, config):
        audio = [_audio_for(tmp_path, k, 2.0) for k in KINDS]
        clips = _clips_for(tmp_path, config, [(k, [1.0]) for k in KINDS])
        avatar = [AvatarClip(k, None, 0.0) for k in KINDS]
        with pytest.raises(DurationMismatch):
            assemble_video(clips, audio, avatar, str(tmp_path / "v.avi"), config)

    def test_missing_section_track_rejected(self, tmp_path, config):
        audio = [_audio_for(tmp_path, k, 1.0) for k in KINDS[:3]]
        clips = _clips_for(tmp_path, config, [(k, [1.0]) for k in KINDS])
        avatar = [AvatarClip(k, None, 0.0) for k in KINDS]
        with pytest.raises(DurationMismatch):
            assemble_video(clips, audio, avatar, str(tmp_path / "v.avi"), config)

    def test_avatar_layer_composited(self, tmp_path, config):
        audio = [_audio_for(tmp_path, k, 1.0) for k in KINDS]
        avatar_path = str(tmp_path / "av.avi")
        av_frame = np.full((40, 40, 3), 255, np.uint8)
        write_avi(avatar_path, [encode_frame(av_frame, "production")] * 10,
                  40, 40, 10, b"MJPG")
        avatar = [AvatarClip(k, avatar_path, 1.0) for k in KINDS]
        clips = _clips_for(tmp_path, config, [(k, [1.0]) for k in KINDS])
        video = assemble_video(clips, audio, avatar, str(tmp_path / "v.avi"), config)
        cap = cv2.VideoCapture(video.path)
        ok, frame = cap.read()
        cap.release()
        assert ok and int(frame.max()) > 200  # avatar pixels over black scene


class TestSampleFrames:
    @pytest.fixture
    def video(self, tmp_path, config) -> VideoArtifact:
        audio = [_audio_for(tmp_path, k, 1.0) for k in KINDS]
        clips = _clips_for(tmp_path, config, [(k, [1.0]) for k in KINDS])
        avatar = [AvatarClip(k, None, 0.0) for k in KINDS]
        return assemble_video(clips, audio, avatar, str(tmp_path / "v.avi"), config)

    def test_count_resolution_and_names(self, video, tmp_path):
        fs = sample_frames(video, (0.0, video.duration_s), 10, str(tmp_path / "fr"))
        assert len(fs.frames) == 10
        assert fs.resolution == MODEL_FRAME_SIZE
        for i, path in enumerate(fs.frames):
            assert os.path.basename(path) == f"frame_{i:03d}.png"
            img = cv2.imread(path)
            assert (img.shape[1], img.shape[0]) == MODEL_FRAME_SIZE

    def test_span_restricts_sampling(self, video, tmp_path):
        fs = sample_frames(video, (1.0, 2.0), 4, str(tmp_path / "fr2"))
        assert fs.source_span == (1.0, 2.0)
        assert len(fs.frames) == 4

    def test_bad_spans_rejected(self, video, tmp_path):
        with pytest.raises(SpanOutOfRange):
            sample_frames(video, (-0.5, 1.0), 2, str(tmp_path / "x"))
        with pytest.raises(SpanOutOfRange):
            sample_frames(video, (0.0, video.duration_s + 1.0), 2, str(tmp_path / "x"))
        with pytest.raises(SpanOutOfRange):
            sample_frames(video, (2.0, 2.0), 2, str(tmp_path / "x"))

    def test_count_must_be_positive(self, video, tmp_path):
        with pytest.raises(ValueError):
            sample_frames(video, (0.0, 1.0), 0, str(tmp_path / "x"))
