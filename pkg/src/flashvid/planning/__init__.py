from .avatar import render_avatar
from .flashtalk import generate_flashtalk
from .narration import narration_slice, register_tts_backend, synthesize_narration
from .sceneplan import generate_sceneplan, redistribute_images

__all__ = [
    "generate_flashtalk",
    "generate_sceneplan",
    "narration_slice",
    "redistribute_images",
    "register_tts_backend",
    "render_avatar",
    "synthesize_narration",
]
