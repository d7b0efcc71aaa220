"""Exception hierarchy shared across the pipeline.

Three broad families matter for exit-code mapping: usage problems,
stage failures, and backend failures.  Everything raised by pipeline
stages derives from StageError; everything raised by a model, TTS, or
avatar backend derives from BackendError.
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class StageError(PipelineError):
    """A pipeline stage could not produce its artifact."""


class BackendError(PipelineError):
    """An external or stub backend failed."""


# ingest
class NetworkError(BackendError):
    pass


class NotFound(StageError):
    pass


class UnsupportedFormat(StageError):
    pass


class ParseError(StageError):
    pass


class EmptyDocument(StageError):
    pass


# gateway
class BackendUnavailable(BackendError):
    pass


class UnknownSchema(PipelineError):
    pass


# planning / editing
class InvalidModelOutput(StageError):
    pass


class UnknownAssetReference(StageError):
    pass


class InfeasiblePlan(StageError):
    pass


class TTSBackendError(BackendError):
    pass


class AvatarBackendError(BackendError):
    pass


class UnknownAgent(PipelineError):
    pass


class MissingPlacement(StageError):
    pass


# compose
class MissingAsset(StageError):
    pass


class RenderError(StageError):
    pass


class DurationMismatch(StageError):
    pass


class EncodeError(StageError):
    pass


class SpanOutOfRange(StageError):
    pass


# evaluate / orchestrator
class EmptyInput(PipelineError):
    pass


class CorruptState(StageError):
    pass
