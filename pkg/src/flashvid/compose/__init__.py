from .assemble import SECTION_TOLERANCE_S, VIDEO_TOLERANCE_S, assemble_video
from .avi import AUDIO_RATE, silence_pcm, video_duration, video_info, wav_duration, write_wav
from .frames import MODEL_FRAME_SIZE, sample_frames
from .render import ClipSegment, build_subscene_clip

__all__ = [
    "AUDIO_RATE",
    "ClipSegment",
    "MODEL_FRAME_SIZE",
    "SECTION_TOLERANCE_S",
    "VIDEO_TOLERANCE_S",
    "assemble_video",
    "build_subscene_clip",
    "sample_frames",
    "silence_pcm",
    "video_duration",
    "video_info",
    "wav_duration",
    "write_wav",
]
