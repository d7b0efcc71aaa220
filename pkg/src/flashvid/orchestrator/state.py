"""Resumable run state.

state.json records, per iteration and stage, a status plus the sha256
of every artifact the stage wrote.  Resume skips stages whose artifacts
verify and re-executes from the first stage that is not done.  A
checksum or file that no longer matches raises CorruptState rather
than silently regenerating.
"""

from __future__ import annotations

import os

from ..errors import CorruptState
from ..jsonio import read_json, sha256_file, write_json

STAGES = ("planning", "editing", "compose", "feedback", "evaluation")

STATUS_PENDING = "pending"
STATUS_DONE = "done"
STATUS_FAILED = "failed"

_SCHEMA_VERSION = 1


class RunState:
    """Mutable view over one paper's state.json."""

    def __init__(self, path: str, base_dir: str, data: dict):
        self.path = path
        self.base_dir = base_dir
        self.data = data

    @classmethod
    def create(cls, path: str, base_dir: str, paper_id: str, source_ref: str,
               config_hash: str) -> "RunState":
        data = {
            "schema_version": _SCHEMA_VERSION,
            "paper_id": paper_id,
            "source_ref": source_ref,
            "config_hash": config_hash,
            "preprocess": {"status": STATUS_PENDING, "artifacts": {}},
            "iterations": {},
        }
        state = cls(path, base_dir, data)
        state.save()
        return state

    @classmethod
    def load(cls, path: str, base_dir: str) -> "RunState":
        if not os.path.exists(path):
            raise CorruptState(f"no run state at {path}")
        data = read_json(path)
        if data.get("schema_version") != _SCHEMA_VERSION:
            raise CorruptState(f"unsupported state schema in {path}")
        return cls(path, base_dir, data)

    @classmethod
    def load_or_create(cls, path: str, base_dir: str, paper_id: str, source_ref: str,
                       config_hash: str) -> "RunState":
        if os.path.exists(path):
            state = cls.load(path, base_dir)
            if state.data["paper_id"] != paper_id:
                raise CorruptState(
                    f"state at {path} belongs to {state.data['paper_id']!r}, not {paper_id!r}")
            if state.data["config_hash"] != config_hash:
                raise CorruptState(
                    "config changed since the recorded run; resume would mix configurations")
            return state
        return cls.create(path, base_dir, paper_id, source_ref, config_hash)

    def save(self) -> None:
        write_json(self.path, self.data)

    @property
    def source_ref(self) -> str:
        return self.data["source_ref"]

    # -- stage records ----------------------------------------------------

    def _slot(self, iteration: int | None, stage: str | None) -> dict:
        if iteration is None:
            return self.data["preprocess"]
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        iters = self.data["iterations"]
        entry = iters.setdefault(str(iteration), {"stages": {}})
        return entry["stages"].setdefault(stage, {"status": STATUS_PENDING, "artifacts": {}})

    def status(self, iteration: int | None, stage: str | None = None) -> str:
        return self._slot(iteration, stage)["status"]

    def _checksums(self, paths: list[str]) -> dict[str, str]:
        out = {}
        for p in sorted(paths):
            rel = os.path.relpath(p, self.base_dir)
            out[rel] = sha256_file(p)
        return out

    def mark_done(self, iteration: int | None, stage: str | None, artifacts: list[str]) -> None:
        if iteration is not None:
            # monotone stage order: predecessors must be done first
            for prior in STAGES[:STAGES.index(stage)]:
                if self.status(iteration, prior) != STATUS_DONE:
                    raise CorruptState(
                        f"stage {stage!r} cannot finish before {prior!r} in iter {iteration}")
        slot = self._slot(iteration, stage)
        slot["status"] = STATUS_DONE
        slot["artifacts"] = self._checksums(artifacts)
        self.save()

    def mark_failed(self, iteration: int | None, stage: str | None) -> None:
        slot = self._slot(iteration, stage)
        slot["status"] = STATUS_FAILED
        self.save()

    def verify(self, iteration: int | None, stage: str | None = None) -> None:
        """Raise CorruptState unless the stage's artifacts match their checksums."""
        slot = self._slot(iteration, stage)
        for rel, digest in slot["artifacts"].items():
            path = os.path.join(self.base_dir, rel)
            if not os.path.exists(path):
                raise CorruptState(f"recorded artifact missing: {rel}")
            if sha256_file(path) != digest:
                raise CorruptState(f"artifact checksum mismatch: {rel}")

    def is_done(self, iteration: int | None, stage: str | None = None) -> bool:
        return self.status(iteration, stage) == STATUS_DONE
