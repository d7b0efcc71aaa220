"""Bundled iteration-0 prompts for the six generation agents.

Every prompt carries a delimited schema block describing the JSON the
agent must return.  Reflection may rewrite everything around the block
but must reproduce the block byte for byte, so the markers double as
the contract checked by the reflection fallback.
"""

from __future__ import annotations

import importlib.resources

from ..errors import InvalidModelOutput

SCHEMA_BEGIN = "[[OUTPUT SCHEMA]]"
SCHEMA_END = "[[END OUTPUT SCHEMA]]"

# appended by the gateway client before each call; everything after the
# marker is per-call context, not part of the agent's persistent prompt
CONTEXT_MARKER = "[[CONTEXT]]"

_FILES = {
    "F": "flashtalk.txt",
    "S": "sceneplan.txt",
    "B": "background.txt",
    "T": "text.txt",
    "E": "effect.txt",
    "L": "layout.txt",
}


def initial_prompt(agent_id: str) -> str:
    """Return the bundled iteration-0 prompt for a generation agent."""
    if agent_id not in _FILES:
        raise KeyError(f"no bundled prompt for agent {agent_id!r}")
    ref = importlib.resources.files(__package__) / _FILES[agent_id]
    return ref.read_text(encoding="utf-8")


def extract_schema_block(prompt_text: str) -> str:
    """Return the schema block of a prompt, markers included.

    Raises InvalidModelOutput when either marker is missing, which is
    how a reflection rewrite that dropped the block gets detected.
    """
    start = prompt_text.find(SCHEMA_BEGIN)
    end = prompt_text.find(SCHEMA_END)
    if start < 0 or end < 0 or end < start:
        raise InvalidModelOutput("prompt is missing its schema block")
    return prompt_text[start : end + len(SCHEMA_END)]
