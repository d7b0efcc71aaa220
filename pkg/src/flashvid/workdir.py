"""Working-directory layout for one paper.

Everything the pipeline writes lives under ``<workdir>/<paper_id>/``:

    raw/                 downloaded source documents
    assets/              extracted figures, tables, screenshot
    manifest.json        asset + text manifest
    prompts/<agent>/<j>.txt
    iter<j>/             per-iteration artifacts
    state.json           stage bookkeeping for resume
    run_manifest.json    checksummed artifact listing
"""

from __future__ import annotations

import os
import re


def safe_paper_id(ref: str) -> str:
    """Derive a filesystem-safe paper id from a URL, arXiv-style id, or path."""
    base = ref.rstrip("/").rsplit("/", 1)[-1]
    base = re.sub(r"\.(pdf|html?)$", "", base, flags=re.IGNORECASE)
    base = re.sub(r"[^A-Za-z0-9._-]+", "_", base).strip("._")
    return base or "paper"


class PaperWorkdir:
    def __init__(self, root: str, paper_id: str):
        self.root = root
        self.paper_id = paper_id
        self.base = os.path.join(root, paper_id)

    def path(self, *parts: str) -> str:
        return os.path.join(self.base, *parts)

    @property
    def raw_dir(self) -> str:
        return self.path("raw")

    @property
    def assets_dir(self) -> str:
        return self.path("assets")

    @property
    def manifest_path(self) -> str:
        return self.path("manifest.json")

    @property
    def state_path(self) -> str:
        return self.path("state.json")

    @property
    def run_manifest_path(self) -> str:
        return self.path("run_manifest.json")

    def prompt_path(self, agent_id: str, iteration: int) -> str:
        return self.path("prompts", agent_id, f"{iteration}.txt")

    def iter_dir(self, iteration: int) -> str:
        return self.path(f"iter{iteration}")

    def ensure(self, *parts: str) -> str:
        p = self.path(*parts)
        os.makedirs(p, exist_ok=True)
        return p
