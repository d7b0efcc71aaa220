"""Uniform client for every model call in the pipeline.

Responsibilities: resolve the backend, assign a sampling temperature
round-robin, validate attachments, enforce the structured-output schema
with bounded retries, and keep an append-only call log that tests and
the orchestrator read back.

A reply that still fails its schema after all retries comes back with
``valid=False`` rather than raising, so callers can exclude it the way
invalid outputs are excluded from aggregation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import cv2
from pydantic import ValidationError

from ..errors import BackendUnavailable, UnknownSchema
from ..jsonio import append_jsonl, sha256_text
from .backends import make_backend
from .schemas import SCHEMAS

AGENT_IDS = (
    "F", "S", "B", "T", "E", "L",
    "feedback_flashtalk", "feedback_sceneplan", "feedback_text",
    "reflection", "evaluation",
)

GENERATION_AGENT_IDS = ("F", "S", "B", "T", "E", "L")

_RETRY_NOTE = "\n\n[[RETRY {n}]]\nYour previous reply failed validation: {error}\nReturn only JSON matching the schema."


@dataclass
class Attachment:
    id: str
    path: str


@dataclass
class ModelRequest:
    agent_id: str
    prompt_text: str
    schema_id: str
    attached_images: list[Attachment] = field(default_factory=list)
    temperature: float | None = None

    def __post_init__(self):
        if self.agent_id not in AGENT_IDS:
            raise ValueError(f"unknown agent id {self.agent_id!r}")
        if not self.prompt_text:
            raise ValueError("prompt_text must be nonempty")


@dataclass
class ModelResponse:
    raw_text: str
    parsed: object | None
    attempts: int
    valid: bool


def parse_structured(raw_text: str, schema_id: str):
    """Validate raw model text against a registered schema.

    Returns (parsed, None) on success or (None, error string) on failure.
    """
    if schema_id not in SCHEMAS:
        raise UnknownSchema(schema_id)
    try:
        return SCHEMAS[schema_id].model_validate_json(raw_text), None
    except ValidationError as exc:
        return None, str(exc)


def mock_respond(request: ModelRequest, seed: int) -> ModelResponse:
    """One-shot call against a fresh mock backend, mainly for tests."""
    from .backends import MockBackend

    raw = MockBackend(seed=seed).respond(request)
    parsed, error = parse_structured(raw, request.schema_id)
    return ModelResponse(raw_text=raw, parsed=parsed, attempts=1, valid=error is None)


class ModelClient:
    def __init__(self, config, backend=None):
        self.config = config
        self.backend = backend if backend is not None else make_backend(config.backend_name, config)
        self.calls: list[dict] = []
        self.log_sink: str | None = None
        self._lock = threading.Lock()
        self._temp_index = 0

    def set_log_sink(self, path: str | None) -> None:
        self.log_sink = path

    def _next_temperature(self) -> float:
        temps = self.config.temperatures
        with self._lock:
            t = temps[self._temp_index % len(temps)]
            self._temp_index += 1
        return t

    def _check_attachments(self, attachments: list[Attachment]) -> list[list[int]]:
        """Decode each attachment and return on-disk [width, height] pairs.

        Real backends receive images downscaled to the configured
        resolution; the mock only consumes ids, so the resize here is a
        validation pass plus bookkeeping for the call log.
        """
        dims = []
        tw, th = self.config.image_resolution
        for att in attachments:
            img = cv2.imread(att.path)
            if img is None:
                raise BackendUnavailable(f"attachment does not decode: {att.path}")
            h, w = img.shape[:2]
            dims.append([w, h])
            if (w, h) != (tw, th):
                cv2.resize(img, (tw, th), interpolation=cv2.INTER_AREA)
        return dims

    def complete_structured(self, request: ModelRequest) -> ModelResponse:
        """Run one structured call with schema enforcement and retries.

        Args:
            request: agent id, prompt (context already appended by the
                caller), schema id, and image attachments.

        Returns:
            ModelResponse; ``valid`` is False when every attempt failed
            schema validation, and the caller must exclude the result.
        """
        if request.schema_id not in SCHEMAS:
            raise UnknownSchema(request.schema_id)
        temperature = request.temperature if request.temperature is not None else self._next_temperature()
        image_dims = self._check_attachments(request.attached_images)

        prompt = request.prompt_text
        raw, parsed, error = "", None, "no attempt made"
        attempts = 0
        limit = max(1, self.config.retry_limit)
        while attempts < limit:
            attempts += 1
            attempt_req = ModelRequest(
                agent_id=request.agent_id,
                prompt_text=prompt,
                schema_id=request.schema_id,
                attached_images=request.attached_images,
                temperature=temperature,
            )
            try:
                raw = self.backend.respond(attempt_req)
            except (BackendUnavailable, UnknownSchema):
                raise
            except Exception as exc:
                raise BackendUnavailable(f"backend {getattr(self.backend, 'name', '?')} failed: {exc}") from exc
            parsed, error = parse_structured(raw, request.schema_id)
            if error is None:
                break
            # re-prompt with the validation error appended
            prompt = request.prompt_text + _RETRY_NOTE.format(n=attempts, error=error[:500])

        valid = error is None
        entry = {
            "agent_id": request.agent_id,
            "schema_id": request.schema_id,
            "temperature": temperature,
            "attempts": attempts,
            "valid": valid,
            "n_images": len(request.attached_images),
            "image_ids": [a.id for a in request.attached_images],
            "image_dims": image_dims,
            "prompt_sha256": sha256_text(request.prompt_text),
        }
        with self._lock:
            entry["index"] = len(self.calls)
            self.calls.append(entry)
            if self.log_sink:
                append_jsonl(self.log_sink, entry)
        return ModelResponse(raw_text=raw, parsed=parsed, attempts=attempts, valid=valid)
