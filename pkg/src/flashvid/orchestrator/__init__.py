from .baseline import BaselineResult, run_baseline
from .cli import main
from .pipeline import RunResult, resume_pipeline, run_pipeline, write_run_manifest
from .state import STAGES, RunState

__all__ = [
    "BaselineResult",
    "RunResult",
    "RunState",
    "STAGES",
    "main",
    "resume_pipeline",
    "run_baseline",
    "run_pipeline",
    "write_run_manifest",
]
