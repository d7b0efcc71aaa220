"""Frame sampling for model-visible images.

Feedback and evaluation agents never see the full video; they see a
fixed number of frames sampled uniformly over a span and resized to a
small model-side resolution.
"""

from __future__ import annotations

import os

import cv2

from ..errors import EncodeError, SpanOutOfRange
from ..types import FrameSet, VideoArtifact
from .avi import video_info

MODEL_FRAME_SIZE = (360, 640)  # (width, height)

_SPAN_SLACK_S = 0.05


def sample_frames(video: VideoArtifact, span: tuple[float, float], count: int,
                  out_dir: str, prefix: str = "frame",
                  resolution: tuple[int, int] = MODEL_FRAME_SIZE) -> FrameSet:
    """Extract exactly `count` frames at uniform timestamps over `span`.

    Timestamps are span midpoint-partitioned: the k-th frame is taken at
    start + (k + 0.5) * (end - start) / count, so a count of 1 samples
    the span's midpoint.  Frames are written as PNGs into out_dir.

    Raises:
        SpanOutOfRange: span not within the video.
        ValueError: count < 1.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    start, end = span
    if start < 0.0 or end > video.duration_s + _SPAN_SLACK_S or start >= end:
        raise SpanOutOfRange(f"span ({start:.3f}, {end:.3f}) outside video "
                             f"of {video.duration_s:.3f}s")

    n, fps, _, _ = video_info(video.path)
    if n < 1 or fps <= 0:
        raise EncodeError(f"video does not decode: {video.path}")
    os.makedirs(out_dir, exist_ok=True)

    cap = cv2.VideoCapture(video.path)
    paths = []
    try:
        for k in range(count):
            t = start + (k + 0.5) * (end - start) / count
            idx = min(n - 1, max(0, int(t * fps)))
            cap.set(cv2.CAP_PROP_POS_FRAMES, idx)
            ok, frame = cap.read()
            if not ok:
                raise EncodeError(f"frame {idx} of {video.path} did not decode")
            frame = cv2.resize(frame, resolution, interpolation=cv2.INTER_AREA)
            path = os.path.join(out_dir, f"{prefix}_{k:03d}.png")
            if not cv2.imwrite(path, frame):
                raise EncodeError(f"could not write {path}")
            paths.append(path)
    finally:
        cap.release()
    return FrameSet(frames=paths, source_span=(start, end), resolution=resolution)
