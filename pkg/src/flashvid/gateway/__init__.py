from .backends import MockBackend, ScriptedBackend, register_backend
from .client import Attachment, ModelClient, ModelRequest, ModelResponse

__all__ = [
    "Attachment",
    "ModelClient",
    "ModelRequest",
    "ModelResponse",
    "MockBackend",
    "ScriptedBackend",
    "register_backend",
]
