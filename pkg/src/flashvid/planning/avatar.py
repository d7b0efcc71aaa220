"""Presenter-avatar clip synthesis.

The stub writes a short video of one static placeholder frame matching
the narration length; the `none` backend yields no clip and the
pipeline composes without an avatar layer.
"""

from __future__ import annotations

import os

import cv2
import numpy as np

from ..compose.avi import encode_frame, write_avi
from ..errors import AvatarBackendError
from ..types import AudioTrack, AvatarClip, Section

_STUB_FPS = 10
_STUB_SIZE = 240


def _placeholder_frame(label: str) -> np.ndarray:
    img = np.full((_STUB_SIZE, _STUB_SIZE, 3), (70, 50, 40), np.uint8)
    center = _STUB_SIZE // 2
    cv2.circle(img, (center, center - 30), 44, (200, 190, 180), -1)
    cv2.ellipse(img, (center, _STUB_SIZE - 40), (62, 48), 0, 180, 360, (90, 120, 160), -1)
    cv2.putText(img, label[:10], (16, _STUB_SIZE - 12), cv2.FONT_HERSHEY_SIMPLEX,
                0.5, (230, 230, 230), 1, cv2.LINE_AA)
    return img


def render_avatar(section: Section, audio: AudioTrack, avatar_backend: str, out_path: str) -> AvatarClip:
    """Produce the avatar clip for one section, synced to its audio.

    Returns an AvatarClip with path=None when the backend is `none`.
    """
    if avatar_backend == "none":
        return AvatarClip(section_kind=section.kind, path=None, duration_s=0.0)
    if avatar_backend != "stub":
        raise AvatarBackendError(f"unknown avatar backend {avatar_backend!r}")
    frame_count = max(1, round(audio.duration_s * _STUB_FPS))
    encoded = encode_frame(_placeholder_frame(section.kind), "production")
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    write_avi(out_path, [encoded] * frame_count, _STUB_SIZE, _STUB_SIZE, _STUB_FPS, b"MJPG")
    return AvatarClip(section_kind=section.kind, path=out_path, duration_s=frame_count / _STUB_FPS)
