"""Narration synthesis and narration-slice arithmetic.

The offline stub emits silence sized by a 2.5 words-per-second speaking
rate, so durations are deterministic; real TTS backends plug in through
the registry and report whatever length they produce.
"""

from __future__ import annotations

import os

from ..compose.avi import AUDIO_RATE, silence_pcm, wav_duration, write_wav
from ..errors import PipelineError, TTSBackendError
from ..types import AudioTrack, Section

WORDS_PER_SECOND = 2.5


def _stub_tts(text: str, out_path: str) -> None:
    duration = len(text.split()) / WORDS_PER_SECOND
    write_wav(out_path, silence_pcm(duration, AUDIO_RATE), AUDIO_RATE)


_TTS_BACKENDS = {"stub": _stub_tts}


def register_tts_backend(name: str, fn) -> None:
    _TTS_BACKENDS[name] = fn


def synthesize_narration(section: Section, tts_backend: str, out_path: str) -> AudioTrack:
    """Render one section's narration to an audio file.

    Args:
        section: the section whose narration_text is spoken.
        tts_backend: registered backend name (`stub` is offline).
        out_path: target audio file path.

    Returns:
        AudioTrack whose duration matches the decoded file.
    """
    if not section.narration_text.strip():
        raise PipelineError("narration_text must be nonempty")
    if tts_backend not in _TTS_BACKENDS:
        raise TTSBackendError(f"unknown tts backend {tts_backend!r}")
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    try:
        _TTS_BACKENDS[tts_backend](section.narration_text, out_path)
    except TTSBackendError:
        raise
    except Exception as exc:
        raise TTSBackendError(f"tts backend {tts_backend!r} failed: {exc}") from exc
    return AudioTrack(section_kind=section.kind, path=out_path, duration_s=wav_duration(out_path))


def narration_slice(narration_text: str, start_s: float, duration_s: float, total_s: float) -> str:
    """Words of a section narration that fall inside one time window.

    Allocation is proportional by word count, which is exactly how the
    stub's constant speaking rate distributes words over time.
    """
    words = narration_text.split()
    if not words or total_s <= 0:
        return ""
    lo = int(round(len(words) * max(0.0, start_s) / total_s))
    hi = int(round(len(words) * min(total_s, start_s + duration_s) / total_s))
    return " ".join(words[lo:max(hi, lo)])
