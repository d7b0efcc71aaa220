"""flashvid: turn a scientific paper into a short-form video.

Stages: ingest -> planning -> editing -> compose, wrapped in an
iterative feedback loop that rewrites the generation agents' prompts,
plus a rubric evaluator for finished videos.  Everything runs offline
against a deterministic mock backend by default.
"""

__version__ = "0.1.0"
