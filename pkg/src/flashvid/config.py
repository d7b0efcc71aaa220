"""Pipeline configuration.

One flat dataclass covers every tunable across the stages.  Values load
from a YAML file with nested sections (``backend:``, ``video:``, ...)
and can be overridden programmatically.  Credentials for remote
backends are read from environment variables by the backends
themselves, never from this file.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import yaml

from .errors import PipelineError
from .jsonio import dumps, sha256_text


@dataclass
class PipelineConfig:
    # orchestration
    iterations: int = 5
    seed: int = 1234
    workdir: str = "work"

    # gateway
    backend_name: str = "mock"
    temperatures: tuple[float, ...] = (0.7, 0.9)
    retry_limit: int = 3
    image_resolution: tuple[int, int] = (360, 640)

    # planning
    tts_backend: str = "stub"
    avatar_backend: str = "stub"  # stub | none
    target_duration_s: float = 120.0

    # editing
    fixed_black_background: bool = True
    sanity_check_enabled: bool = True

    # compose
    fps: int = 30
    canvas: tuple[int, int] = (1080, 1920)  # width, height (9:16 portrait)
    codec_profile: str = "production"  # production | lossless_test

    # feedback
    metric_mode: str = "experiment"  # experiment | full
    score_scale: tuple[int, int] = (1, 5)
    route_visual_feedback_to_effect: bool = False

    # evaluation aggregation
    exclusion_policy: str = "report"  # report | metric

    # ingest
    arxiv_base_url: str = "https://arxiv.org"

    warnings: list = field(default_factory=list, repr=False, compare=False)

    def validate(self) -> "PipelineConfig":
        if self.iterations < 1:
            raise PipelineError("iterations must be >= 1")
        if self.codec_profile not in ("production", "lossless_test"):
            raise PipelineError(f"unknown codec profile: {self.codec_profile}")
        if self.metric_mode not in ("experiment", "full"):
            raise PipelineError(f"unknown metric mode: {self.metric_mode}")
        if not 60.0 <= self.target_duration_s <= 180.0:
            raise PipelineError("target_duration_s must lie in [60, 180]")
        if self.avatar_backend not in ("stub", "none"):
            raise PipelineError(f"unknown avatar backend: {self.avatar_backend}")
        return self

    def content_hash(self) -> str:
        """Stable hash of every behavior-relevant field, for run manifests."""
        d = {}
        for f in fields(self):
            if f.name == "warnings":
                continue
            v = getattr(self, f.name)
            d[f.name] = list(v) if isinstance(v, tuple) else v
        return sha256_text(dumps(d))


def _pair(value, kind=int) -> tuple:
    if isinstance(value, str):
        a, _, b = value.partition("x")
        return (kind(a), kind(b))
    return tuple(kind(v) for v in value)


# (yaml section, yaml key) -> config field, converter
_KEY_MAP = {
    ("", "iterations"): ("iterations", int),
    ("", "seed"): ("seed", int),
    ("", "workdir"): ("workdir", str),
    ("backend", "name"): ("backend_name", str),
    ("backend", "temperatures"): ("temperatures", lambda v: tuple(float(x) for x in v)),
    ("backend", "retry_limit"): ("retry_limit", int),
    ("backend", "image_resolution"): ("image_resolution", _pair),
    ("tts", "backend"): ("tts_backend", str),
    ("avatar", "backend"): ("avatar_backend", str),
    ("video", "target_duration_s"): ("target_duration_s", float),
    ("video", "fps"): ("fps", int),
    ("video", "canvas"): ("canvas", _pair),
    ("video", "codec_profile"): ("codec_profile", str),
    ("background", "fixed_black"): ("fixed_black_background", bool),
    ("sanity_check", "enabled"): ("sanity_check_enabled", bool),
    ("feedback", "metric_mode"): ("metric_mode", str),
    ("feedback", "score_scale"): ("score_scale", lambda v: tuple(int(x) for x in v)),
    ("feedback", "route_visual_to_effect"): ("route_visual_feedback_to_effect", bool),
    ("evaluate", "exclusion_policy"): ("exclusion_policy", str),
    ("ingest", "arxiv_base_url"): ("arxiv_base_url", str),
}


def load_config(path: str | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Build a config from an optional YAML file plus keyword overrides.

    Args:
        path: YAML file with nested sections; None means all defaults.
        overrides: field-name -> value applied after the file.
    """
    cfg = PipelineConfig()
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise PipelineError(f"config root must be a mapping: {path}")
        for (section, key), (attr, conv) in _KEY_MAP.items():
            holder = data if section == "" else data.get(section, {})
            if isinstance(holder, dict) and key in holder:
                setattr(cfg, attr, conv(holder[key]))
    for name, value in (overrides or {}).items():
        if not hasattr(cfg, name):
            raise PipelineError(f"unknown config field: {name}")
        setattr(cfg, name, value)
    return cfg.validate()
