"""Hand-rolled AVI/WAV containers.

The runtime environment has no muxing tool, so the final video is
written directly: a RIFF AVI with an MJPG (production) or PNG-in-AVI
(lossless test) video stream, an optional PCM audio stream interleaved
per frame, and an idx1 index.  OpenCV decodes both profiles; the PNG
profile round-trips frames pixel-exact, which is what golden-frame
tests compare against.

Byte output is a pure function of the frames and samples passed in.
"""

from __future__ import annotations

import struct
import wave

import cv2
import numpy as np

from ..errors import EncodeError

AUDIO_RATE = 22050  # 22050 / 30 fps = 735 samples per frame, no drift
AUDIO_SAMPWIDTH = 2
AUDIO_CHANNELS = 1

PROFILE_FOURCC = {"production": b"MJPG", "lossless_test": b"png "}
_JPEG_QUALITY = 95


def encode_frame(frame_bgr: np.ndarray, profile: str) -> bytes:
    if profile == "lossless_test":
        ok, buf = cv2.imencode(".png", frame_bgr)
    else:
        ok, buf = cv2.imencode(".jpg", frame_bgr, [cv2.IMWRITE_JPEG_QUALITY, _JPEG_QUALITY])
    if not ok:
        raise EncodeError("frame encoding failed")
    return buf.tobytes()


def _chunk(fourcc: bytes, payload: bytes) -> bytes:
    pad = b"\x00" if len(payload) % 2 else b""
    return fourcc + struct.pack("<I", len(payload)) + payload + pad


def _list(kind: bytes, payload: bytes) -> bytes:
    return _chunk(b"LIST", kind + payload)


# AVISTREAMHEADER: type, handler, flags, priority, language, initial
# frames, scale, rate, start, length, suggested buffer, quality,
# sample size, frame rect
_STRH = "<4s4sIHHIIIIIIII4h"


def write_avi(path: str, frames: list[bytes], width: int, height: int, fps: int,
              codec: bytes, pcm: bytes = b"", rate: int = AUDIO_RATE) -> None:
    """Write encoded frames (and optional 16-bit mono PCM) as one AVI."""
    if not frames:
        raise EncodeError("cannot write a video with zero frames")
    n = len(frames)
    blockalign = AUDIO_CHANNELS * AUDIO_SAMPWIDTH
    bytes_per_sec = rate * blockalign
    maxbuf = max(len(f) for f in frames)

    strh_v = struct.pack(_STRH, b"vids", codec, 0, 0, 0, 0, 1, int(fps), 0, n,
                         maxbuf, 0xFFFFFFFF, 0, 0, 0, int(width), int(height))
    bih = struct.pack("<IiiHH4sIiiII", 40, width, height, 1, 24, codec,
                      width * height * 3, 0, 0, 0, 0)
    strl = _list(b"strl", _chunk(b"strh", strh_v) + _chunk(b"strf", bih))
    streams = 1
    if pcm:
        streams = 2
        total_samples = len(pcm) // blockalign
        strh_a = struct.pack(_STRH, b"auds", b"\x00\x00\x00\x00", 0, 0, 0, 0,
                             blockalign, bytes_per_sec, 0, total_samples,
                             bytes_per_sec, 0xFFFFFFFF, blockalign, 0, 0, 0, 0)
        wfx = struct.pack("<HHIIHH", 1, AUDIO_CHANNELS, rate, bytes_per_sec,
                          blockalign, AUDIO_SAMPWIDTH * 8)
        strl += _list(b"strl", _chunk(b"strh", strh_a) + _chunk(b"strf", wfx))
    avih = struct.pack("<IIIIIIIIIIIIII", int(1_000_000 / fps),
                       bytes_per_sec + maxbuf * int(fps), 0, 0x10, n, 0,
                       streams, maxbuf, width, height, 0, 0, 0, 0)
    hdrl = _list(b"hdrl", _chunk(b"avih", avih) + strl)

    movi_parts: list[bytes] = []
    index: list[tuple[bytes, int, int]] = []
    offset = 4  # past the 'movi' fourcc
    audio_pos = 0
    samples_per_frame = rate // int(fps)
    step = samples_per_frame * blockalign
    for frame in frames:
        index.append((b"00dc", offset, len(frame)))
        c = _chunk(b"00dc", frame)
        movi_parts.append(c)
        offset += len(c)
        piece = pcm[audio_pos:audio_pos + step]
        audio_pos += len(piece)
        if piece:
            index.append((b"01wb", offset, len(piece)))
            c = _chunk(b"01wb", piece)
            movi_parts.append(c)
            offset += len(c)
    rest = pcm[audio_pos:]
    if rest:
        index.append((b"01wb", offset, len(rest)))
        movi_parts.append(_chunk(b"01wb", rest))
    movi = _list(b"movi", b"".join(movi_parts))
    idx1 = _chunk(b"idx1", b"".join(
        struct.pack("<4sIII", cc, 0x10, off, size) for cc, off, size in index))

    riff = b"AVI " + hdrl + movi + idx1
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(riff)) + riff)


def video_info(path: str) -> tuple[int, float, int, int]:
    """(frame count, fps, width, height) of a video file via OpenCV."""
    cap = cv2.VideoCapture(path)
    try:
        if not cap.isOpened():
            raise EncodeError(f"video does not decode: {path}")
        return (
            int(cap.get(cv2.CAP_PROP_FRAME_COUNT)),
            float(cap.get(cv2.CAP_PROP_FPS)),
            int(cap.get(cv2.CAP_PROP_FRAME_WIDTH)),
            int(cap.get(cv2.CAP_PROP_FRAME_HEIGHT)),
        )
    finally:
        cap.release()


def video_duration(path: str) -> float:
    count, fps, _, _ = video_info(path)
    if fps <= 0:
        raise EncodeError(f"video reports no frame rate: {path}")
    return count / fps


def silence_pcm(duration_s: float, rate: int = AUDIO_RATE) -> bytes:
    samples = max(1, round(duration_s * rate))
    return b"\x00\x00" * samples


def write_wav(path: str, pcm: bytes, rate: int = AUDIO_RATE) -> None:
    with wave.open(path, "wb") as wf:
        wf.setnchannels(AUDIO_CHANNELS)
        wf.setsampwidth(AUDIO_SAMPWIDTH)
        wf.setframerate(rate)
        wf.writeframes(pcm)


def read_wav(path: str) -> tuple[bytes, int]:
    with wave.open(path, "rb") as wf:
        if wf.getnchannels() != AUDIO_CHANNELS or wf.getsampwidth() != AUDIO_SAMPWIDTH:
            raise EncodeError(f"unexpected wav layout in {path}")
        return wf.readframes(wf.getnframes()), wf.getframerate()


def wav_duration(path: str) -> float:
    with wave.open(path, "rb") as wf:
        return wf.getnframes() / wf.getframerate()
