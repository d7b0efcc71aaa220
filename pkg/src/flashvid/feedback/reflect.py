"""Prompt reflection: rewrite a generation agent's prompt from feedback.

Inputs are exactly the current prompt and the current summary slice —
nothing from earlier iterations is read.  An empty slice advances the
iteration counter with the text byte-for-byte unchanged and makes no
model call.  The prompt's schema block is immutable: a revision that
drops it is retried once, then the old text is kept with a warning.
"""

from __future__ import annotations

import logging

from .. import jsonio
from ..config import PipelineConfig
from ..gateway import ModelClient, ModelRequest
from ..prompts import CONTEXT_MARKER, extract_schema_block
from ..types import PromptState

log = logging.getLogger(__name__)

_REFLECT_TEMPLATE = (
    "You maintain the working prompt of one video-generation agent. "
    "Rewrite it so the latest review guidance is addressed. Keep the "
    "agent's role and its output schema block EXACTLY as they are, "
    "ignore suggestions aimed at other agents, and do not let the "
    "prompt grow across revisions. Return JSON: {\"revised_prompt\": \"...\"}."
)

_SCHEMA_NUDGE = (
    "\nYour previous revision dropped the output schema block. It must "
    "appear verbatim, byte for byte."
)


def reflect_prompt(prompt: PromptState, summary_slice: str, client: ModelClient,
                   config: PipelineConfig) -> PromptState:
    """Produce the agent's prompt for iteration j+1.

    Args:
        prompt: PromptState at iteration j.
        summary_slice: this agent's routed guidance, possibly empty.
        client: gateway client.
        config: pipeline config.

    Returns:
        PromptState at iteration j+1.  Identity (and no model call)
        when the slice is empty; old text kept with a warning when the
        revision repeatedly loses the schema block.
    """
    next_iteration = prompt.iteration + 1
    if not summary_slice.strip():
        return PromptState(agent_id=prompt.agent_id, iteration=next_iteration,
                           prompt_text=prompt.prompt_text)

    schema_block = extract_schema_block(prompt.prompt_text)
    template = _REFLECT_TEMPLATE
    for attempt in range(2):
        ctx = {
            "agent_id": prompt.agent_id,
            "current_prompt": prompt.prompt_text,
            "summary": summary_slice,
        }
        full = f"{template}\n\n{CONTEXT_MARKER}\n{jsonio.dumps(ctx)}"
        response = client.complete_structured(ModelRequest(
            agent_id="reflection", prompt_text=full, schema_id="prompt_revision_v1"))
        if response.valid and schema_block in response.parsed.revised_prompt:
            return PromptState(agent_id=prompt.agent_id, iteration=next_iteration,
                               prompt_text=response.parsed.revised_prompt)
        template = _REFLECT_TEMPLATE + _SCHEMA_NUDGE

    log.warning("reflection for agent %s kept losing the schema block; keeping the old prompt",
                prompt.agent_id)
    return PromptState(agent_id=prompt.agent_id, iteration=next_iteration,
                       prompt_text=prompt.prompt_text)
