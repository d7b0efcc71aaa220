"""Final video assembly.

Clips are laid on a global frame grid derived from the narration
tracks: section boundaries come from audio durations, sub-scene
boundaries from clip durations (the last clip of a section is pinned to
the section's audio end).  Frame i covers [i/fps, (i+1)/fps) and is
rendered at its midpoint, so the video length can differ from the audio
total only by sub-frame rounding.
"""

from __future__ import annotations

import logging

import cv2
import numpy as np

from ..config import PipelineConfig
from ..errors import DurationMismatch, EncodeError
from ..types import SECTION_KINDS, AudioTrack, AvatarClip, VideoArtifact
from . import avi
from .render import ClipSegment

log = logging.getLogger(__name__)

# per-section disagreement between clip total and narration length
SECTION_TOLERANCE_S = 0.25
# end-to-end video vs narration total
VIDEO_TOLERANCE_S = 0.5


def _section_kind_of(sub_scene_id: str) -> str:
    return sub_scene_id.rsplit("_", 1)[0]


def _load_avatar_frames(path: str) -> tuple[list[np.ndarray], float]:
    cap = cv2.VideoCapture(path)
    try:
        if not cap.isOpened():
            raise EncodeError(f"avatar clip does not decode: {path}")
        fps = cap.get(cv2.CAP_PROP_FPS) or 10.0
        frames = []
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            frames.append(frame)
    finally:
        cap.release()
    if not frames:
        raise EncodeError(f"avatar clip has no frames: {path}")
    return frames, float(fps)


def assemble_video(clips: list[ClipSegment], audio: list[AudioTrack],
                   avatar: list[AvatarClip], out_path: str,
                   config: PipelineConfig, iteration: int = 0) -> VideoArtifact:
    """Mux ordered sub-scene clips with narration and avatar into one file.

    Args:
        clips: all sub-scene clips in hook -> context -> teaser -> CTA
            order (sub-scene order within each section).
        audio: one narration track per section.
        avatar: avatar clips per section; entries with ``path=None`` are
            skipped.
        out_path: output video file (AVI).
        config: fps, canvas, codec profile.
        iteration: recorded on the returned artifact.

    Returns:
        VideoArtifact for the written file.

    Raises:
        DurationMismatch: clips and audio disagree beyond tolerance.
        EncodeError: encoding or muxing failure.
    """
    fps = config.fps
    if fps <= 0 or avi.AUDIO_RATE % fps != 0:
        raise EncodeError(f"fps {fps} must divide the audio rate {avi.AUDIO_RATE}")
    width, height = config.canvas

    tracks = {a.section_kind: a for a in audio}
    avatars = {a.section_kind: a for a in avatar if a.path is not None}

    # partition clips per section, preserving input order
    ordered: list[tuple[str, list[ClipSegment]]] = []
    flat: list[ClipSegment] = []
    for kind in SECTION_KINDS:
        if kind not in tracks:
            raise DurationMismatch(f"no narration track for section {kind!r}")
        section_clips = [c for c in clips if _section_kind_of(c.sub_scene_id) == kind]
        if not section_clips:
            raise DurationMismatch(f"no clips for section {kind!r}")
        total = sum(c.duration_s for c in section_clips)
        if abs(total - tracks[kind].duration_s) > SECTION_TOLERANCE_S:
            raise DurationMismatch(
                f"section {kind!r}: clips total {total:.3f}s vs narration "
                f"{tracks[kind].duration_s:.3f}s")
        ordered.append((kind, section_clips))
        flat.extend(section_clips)
    if [c.sub_scene_id for c in flat] != [c.sub_scene_id for c in clips]:
        raise DurationMismatch("clips are not in section order")

    # global timeline: (clip, seg_start, seg_end, section_start, avatar frames, avatar fps)
    segments = []
    section_start = 0.0
    pcm = b""
    for kind, section_clips in ordered:
        track = tracks[kind]
        section_end = section_start + track.duration_s
        av_frames, av_fps = (None, 0.0)
        if kind in avatars:
            av_frames, av_fps = _load_avatar_frames(avatars[kind].path)
        t = section_start
        for i, clip in enumerate(section_clips):
            seg_end = section_end if i == len(section_clips) - 1 else t + clip.duration_s
            segments.append((clip, t, seg_end, section_start, av_frames, av_fps))
            t = seg_end
        data, rate = avi.read_wav(track.path)
        if rate != avi.AUDIO_RATE:
            raise EncodeError(f"narration {track.path} has rate {rate}, expected {avi.AUDIO_RATE}")
        pcm += data
        section_start = section_end

    total_s = section_start
    total_frames = max(1, round(total_s * fps))
    samples_per_frame = avi.AUDIO_RATE // fps
    target_bytes = total_frames * samples_per_frame * avi.AUDIO_SAMPWIDTH
    pcm = pcm[:target_bytes].ljust(target_bytes, b"\x00")

    codec = avi.PROFILE_FOURCC.get(config.codec_profile)
    if codec is None:
        raise EncodeError(f"unknown codec profile {config.codec_profile!r}")

    encoded: list[bytes] = []
    seg_idx = 0
    for g in range(total_frames):
        t_global = (g + 0.5) / fps
        while seg_idx < len(segments) - 1 and t_global >= segments[seg_idx][2]:
            seg_idx += 1
        clip, seg_start, _, sec_start, av_frames, av_fps = segments[seg_idx]
        avatar_frame = None
        if av_frames is not None:
            avatar_frame = av_frames[min(int((t_global - sec_start) * av_fps), len(av_frames) - 1)]
        frame = clip.render_at(t_global - seg_start, avatar_frame)
        if frame.shape[:2] != (height, width):
            raise EncodeError(f"clip {clip.sub_scene_id} rendered {frame.shape[1]}x{frame.shape[0]}, "
                              f"canvas is {width}x{height}")
        encoded.append(avi.encode_frame(frame, config.codec_profile))

    avi.write_avi(out_path, encoded, width, height, fps, codec, pcm=pcm)

    n, _, w, h = avi.video_info(out_path)
    if (n, w, h) != (total_frames, width, height):
        raise EncodeError(f"written video reads back as {n} frames {w}x{h}, "
                          f"expected {total_frames} at {width}x{height}")
    duration = total_frames / fps
    if abs(duration - total_s) > VIDEO_TOLERANCE_S:
        raise DurationMismatch(f"assembled {duration:.3f}s vs narration {total_s:.3f}s")
    return VideoArtifact(path=out_path, duration_s=duration, width_px=width,
                         height_px=height, iteration=iteration)
