"""Model backends.

``MockBackend`` lets the whole pipeline run offline: for every schema it
emits a valid JSON reply as a pure function of (agent id, prompt text,
attached image ids, seed).  The per-call context that callers append
after the context marker is part of the prompt text, so the mock can
read it without breaking that purity.

``ScriptedBackend`` replays canned replies in order and exists so tests
can exercise retry, exclusion, and fallback paths with a misbehaving
model.
"""

from __future__ import annotations

import hashlib
import json
import random
import re

from ..errors import BackendUnavailable, UnknownSchema
from ..prompts import CONTEXT_MARKER, SCHEMA_BEGIN, SCHEMA_END
from .schemas import SCHEMAS, SECTION_KINDS

_BACKENDS: dict[str, callable] = {}


def register_backend(name: str, factory) -> None:
    """Register a backend factory: config -> backend object."""
    _BACKENDS[name] = factory


def make_backend(name: str, config):
    if name not in _BACKENDS:
        raise BackendUnavailable(f"no backend registered under {name!r}")
    return _BACKENDS[name](config)


def _context(prompt_text: str) -> dict:
    pos = prompt_text.rfind(CONTEXT_MARKER)
    if pos < 0:
        return {}
    blob = prompt_text[pos + len(CONTEXT_MARKER):].strip()
    # retry notes are appended after the context block; cut at the marker
    cut = blob.find("[[RETRY")
    if cut >= 0:
        blob = blob[:cut].strip()
    try:
        return json.loads(blob)
    except json.JSONDecodeError:
        return {}


_VOCAB = (
    "model data result method idea signal deep simple novel scale test "
    "learn fast robust sharp clean proof value gain shift core edge real "
    "world task agent video frame score loop plan step view"
).split()

_SECTION_FRACTIONS = {
    "aggressive_hook": 0.20,
    "brief_context": 0.35,
    "intriguing_teaser": 0.30,
    "call_to_action": 0.15,
}

_SECTION_OPENERS = {
    "aggressive_hook": "Stop scrolling, this result will surprise you.",
    "brief_context": "Here is the problem in plain words.",
    "intriguing_teaser": "The core trick is simpler than you think.",
    "call_to_action": "Read the full paper and follow for more.",
}

_DIRECTION_TEMPLATES = (
    "Start with a dramatic zoom-in on {img}",
    "Hold a steady close-up of {img} while the words land",
    "Slow pan across {img} from left to right",
    "Fade in the headline text over the dark backdrop",
    "Static emphasis card, text only",
)

_OVERLAY_COLORS = ("#FFFFFF", "#FFD166", "#06D6A0", "#EF476F", "#118AB2")

_FEEDBACK_COMMENTS = {
    "Curiosity": (
        "the opening claim lands well",
        "sharpen the first sentence, it reads flat",
        "tease the result earlier to pull viewers in",
    ),
    "Clarity": (
        "wording is easy to follow",
        "simplify the second sentence",
        "define the key term before using it",
    ),
    "Effectiveness": (
        "the ask at the end is concrete",
        "state the payoff before the ask",
    ),
    "Narrative Coherence": (
        "sub-scenes follow the script cleanly",
        "the jump between visuals feels abrupt, bridge it",
    ),
    "Timing and Pacing": (
        "pacing is even across the section",
        "the middle sub-scene drags, shorten it",
    ),
    "Visual Relevance and Clarity": (
        "the chosen image matches the words",
        "swap in the figure that shows the result",
        "the visual is on screen too briefly to read",
    ),
    "Key Information Coverage": (
        "overlays carry the key phrase",
        "the main number never appears on screen, add it",
    ),
    "Timing and Alignment": (
        "text appears in step with the narration",
        "the overlay lags the spoken phrase, start it earlier",
    ),
}

_EVAL_COMMENTS = {
    "SI": "the video tracks the source material",
    "KCC": "core ideas are present",
    "LF": "flow is easy to follow",
    "C": "wording stays plain",
    "SR": "visuals match the words",
    "AVA": "audio and visuals line up",
    "AR": "holds attention",
    "Pacing": "tempo stays even",
    "CTA": "the closing ask is clear",
    "HE": "opening grabs quickly",
}


def _rng_for(request, seed: int) -> random.Random:
    img_ids = ",".join(a.id for a in request.attached_images)
    key = "|".join([
        request.agent_id,
        hashlib.sha256(request.prompt_text.encode("utf-8")).hexdigest(),
        img_ids,
        str(seed),
    ])
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()
    return random.Random(int(digest[:16], 16))


def _words(rng: random.Random, count: int, flavor: list[str]) -> str:
    """Deterministic filler narration of exactly `count` words."""
    out: list[str] = []
    while len(out) < count:
        n = rng.randint(5, 9)
        picks = [rng.choice(_VOCAB) for _ in range(n)]
        if flavor and rng.random() < 0.5:
            picks[rng.randrange(n)] = rng.choice(flavor)
        sentence = " ".join(picks)
        out.extend((sentence[0].upper() + sentence[1:] + ".").split())
    return " ".join(out[:count])


def _gen_sections(rng: random.Random, ctx: dict) -> list[dict]:
    target = float(ctx.get("target_duration_s", 120.0))
    title_words = [w for w in re.findall(r"[A-Za-z]+", ctx.get("title", "")) if len(w) > 3]
    assets = ctx.get("assets", [])
    screenshot = [a["id"] for a in assets if a.get("kind") == "screenshot"]
    figures = [a["id"] for a in assets if a.get("kind") != "screenshot"]
    sections = []
    for i, kind in enumerate(SECTION_KINDS):
        budget = max(8, round(target * 2.5 * _SECTION_FRACTIONS[kind]))
        opener = _SECTION_OPENERS[kind]
        body = _words(rng, max(0, budget - len(opener.split())), title_words)
        image_ids = list(screenshot) if i == 0 else []
        sections.append({
            "kind": kind,
            "narration_text": (opener + " " + body).strip(),
            "image_ids": image_ids,
        })
    for j, fig in enumerate(figures):
        sections[1 + j % 3]["image_ids"].append(fig)
    return sections


def _gen_sub_scenes(rng: random.Random, section: dict, max_count: int = 5) -> list[dict]:
    image_ids = list(section.get("image_ids", []))
    count = rng.choice((1, 2, 2, 3, 3, 4, min(5, max_count)))
    subs = [
        {
            "description": "",
            "duration_s": round(rng.uniform(2.0, 8.0), 1),
            "image_ids": [],
        }
        for _ in range(count)
    ]
    # the model places most images explicitly and leaves the rest to the
    # redistribution fallback
    for img in image_ids:
        if rng.random() < 0.75:
            subs[rng.randrange(count)]["image_ids"].append(img)
    for i, sub in enumerate(subs):
        pool = sub["image_ids"] or image_ids
        if pool:
            template = rng.choice(_DIRECTION_TEMPLATES)
            sub["description"] = template.format(img=pool[0])
        else:
            sub["description"] = _DIRECTION_TEMPLATES[4]
    return subs


def _gen_overlays(rng: random.Random, ctx: dict) -> list[dict]:
    slice_words = str(ctx.get("narration_slice", "key idea worth your time")).split()
    duration = float(ctx.get("duration_s", 4.0))
    n = rng.randint(1, 3)
    # fixed horizontal bands so a well-behaved reply never overlaps itself
    bands = ((0.08, 0.10), (0.62, 0.10), (0.80, 0.10))
    overlays = []
    for i in range(n):
        if slice_words:
            start_w = rng.randrange(max(1, len(slice_words) - 3))
            phrase = " ".join(slice_words[start_w: start_w + rng.randint(2, 4)])
        else:
            phrase = "key idea"
        y, h = bands[i]
        seg = duration / n
        overlays.append({
            "content": phrase,
            "font_size_pt": rng.randint(28, 64),
            "color": rng.choice(_OVERLAY_COLORS),
            "position": [0.08, y, 0.84, h],
            "start_s": round(i * seg, 3),
            "duration_s": round(seg, 3),
        })
    return overlays


def _gen_effects(rng: random.Random, ctx: dict) -> list[dict]:
    description = str(ctx.get("description", ""))
    duration = float(ctx.get("duration_s", 4.0))
    components = list(ctx.get("component_ids", []))
    lower = description.lower()

    def find_target(default_first=True):
        # longest id first so "fig_10" wins over "fig_1" on substring match
        for cid in sorted(components, key=len, reverse=True):
            if cid.lower() in lower:
                return cid
        return components[0] if components and default_first else None

    effects = []
    if "zoom" in lower:
        target = find_target()
        if target:
            kind = "zoom_out" if "zoom-out" in lower or "zoom out" in lower else "zoom_in"
            effects.append({
                "kind": kind, "target_component_id": target,
                "start_s": 0.0, "duration_s": round(duration, 3), "magnitude": 1.3,
            })
    elif "pan" in lower:
        target = find_target()
        if target:
            effects.append({
                "kind": "pan", "target_component_id": target,
                "start_s": 0.0, "duration_s": round(duration, 3), "magnitude": 0.2,
            })
    elif "fade" in lower and components:
        effects.append({
            "kind": "fade_in", "target_component_id": components[0],
            "start_s": 0.0, "duration_s": round(min(1.5, duration), 3), "magnitude": 1.0,
        })
    return effects


def _gen_layout(rng: random.Random, ctx: dict) -> dict:
    components = ctx.get("components", [])
    placements = {}
    images = [c for c in components if c.get("kind") == "image"]
    texts = [c for c in components if c.get("kind") == "text"]
    avatars = [c for c in components if c.get("kind") == "avatar"]
    if images:
        slot_h = 0.52 / len(images)
        for i, comp in enumerate(images):
            iw, ih = max(1, comp.get("width", 4)), max(1, comp.get("height", 3))
            h = slot_h * 0.9
            # normalized aspect correction for a 9:16 frame
            w = min(0.9, (iw / ih) * (16.0 / 9.0) * h)
            placements[comp["id"]] = [round((1 - w) / 2, 4), round(0.06 + i * slot_h, 4), round(w, 4), round(h, 4)]
    if texts:
        band_h = 0.30 / len(texts)
        for i, comp in enumerate(texts):
            placements[comp["id"]] = [0.08, round(0.62 + i * band_h, 4), 0.84, round(band_h * 0.8, 4)]
    for comp in avatars:
        placements[comp["id"]] = [0.72, 0.84, 0.24, 0.135]
    return {"placements": placements}


def _gen_feedback(rng: random.Random, ctx: dict) -> dict:
    metric = str(ctx.get("metric_name", "Clarity"))
    pool = _FEEDBACK_COMMENTS.get(metric, ("solid overall", "tighten this part"))
    return {
        "metric_name": metric,
        "score": rng.choices((2, 3, 4, 5), weights=(1, 3, 3, 2))[0],
        "comment": rng.choice(pool),
    }


def _gen_summary(ctx: dict) -> dict:
    per_agent = {}
    for agent_id, slice_ in sorted(ctx.get("per_agent", {}).items()):
        comments = list(dict.fromkeys(slice_.get("comments", [])))[:3]
        means = slice_.get("mean_scores", {})
        parts = [f"mean {m} {means[m]:.2f}" for m in sorted(means)]
        text = "; ".join(parts + comments)
        per_agent[agent_id] = {"summary": text}
    return {"per_agent": per_agent}


_GUIDANCE_HEADER = "Guidance from the latest review:"


def _gen_revision(ctx: dict) -> dict:
    current = str(ctx.get("current_prompt", ""))
    summary = str(ctx.get("summary", "")).strip()
    if not summary:
        return {"revised_prompt": current}
    start = current.find(SCHEMA_BEGIN)
    end = current.find(SCHEMA_END)
    if start < 0 or end < 0:
        return {"revised_prompt": current}
    schema_block = current[start: end + len(SCHEMA_END)]
    preamble, tail = current[:start], current[end + len(SCHEMA_END):]
    # drop any guidance section from the previous iteration so the
    # prompt does not grow without bound
    cut = preamble.find(_GUIDANCE_HEADER)
    if cut >= 0:
        preamble = preamble[:cut]
    bullets = "\n".join(f"- {p.strip()}" for p in summary.split(";") if p.strip())
    revised = f"{preamble.rstrip()}\n\n{_GUIDANCE_HEADER}\n{bullets}\n\n{schema_block}{tail}"
    return {"revised_prompt": revised}


def _gen_evaluation(rng: random.Random, ctx: dict) -> dict:
    metric_names = ctx.get("metric_names", list(_EVAL_COMMENTS))
    scores = {m: rng.choices((2, 3, 4, 5), weights=(1, 3, 3, 2))[0] for m in metric_names}
    comments = {m: _EVAL_COMMENTS.get(m, "adequate") for m in metric_names}
    return {"scores": scores, "comments": comments}


def _gen_baseline(rng: random.Random, ctx: dict) -> dict:
    sections = _gen_sections(rng, ctx)
    scenes = []
    for section in sections:
        subs = _gen_sub_scenes(rng, section, max_count=3)
        for sub in subs:
            sub["overlays"] = _gen_overlays(rng, {
                "narration_slice": section["narration_text"],
                "duration_s": sub["duration_s"],
            })[:1]
        scenes.append({"section_kind": section["kind"], "sub_scenes": subs})
    return {"sections": sections, "scenes": scenes}


class MockBackend:
    """Deterministic offline model; replies are valid for every schema."""

    name = "mock"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def respond(self, request) -> str:
        if request.schema_id not in SCHEMAS:
            raise UnknownSchema(request.schema_id)
        rng = _rng_for(request, self.seed)
        ctx = _context(request.prompt_text)
        if request.schema_id == "flashtalk_v1":
            out = {"sections": _gen_sections(rng, ctx),
                   "target_duration_s": float(ctx.get("target_duration_s", 120.0))}
        elif request.schema_id == "sceneplan_v1":
            sections = ctx.get("sections") or [{"kind": k, "image_ids": []} for k in SECTION_KINDS]
            out = {"scenes": [
                {"section_kind": s["kind"], "sub_scenes": _gen_sub_scenes(rng, s)}
                for s in sections
            ]}
        elif request.schema_id == "background_v1":
            pool = ctx.get("image_ids", [])
            out = {"background": rng.choice(pool) if pool else "#000000"}
        elif request.schema_id == "text_overlays_v1":
            out = {"overlays": _gen_overlays(rng, ctx)}
        elif request.schema_id == "effects_v1":
            out = {"effects": _gen_effects(rng, ctx)}
        elif request.schema_id == "layout_v1":
            out = _gen_layout(rng, ctx)
        elif request.schema_id == "feedback_v1":
            out = _gen_feedback(rng, ctx)
        elif request.schema_id == "feedback_summary_v1":
            out = _gen_summary(ctx)
        elif request.schema_id == "prompt_revision_v1":
            out = _gen_revision(ctx)
        elif request.schema_id == "evaluation_v1":
            out = _gen_evaluation(rng, ctx)
        else:  # baseline_v1
            out = _gen_baseline(rng, ctx)
        return json.dumps(out, sort_keys=True)


class ScriptedBackend:
    """Replays canned raw replies; entries may be strings or callables."""

    name = "scripted"

    def __init__(self, replies):
        self.replies = list(replies)
        self.served = 0

    def respond(self, request) -> str:
        if self.served >= len(self.replies):
            raise BackendUnavailable("scripted backend exhausted")
        reply = self.replies[self.served]
        self.served += 1
        return reply(request) if callable(reply) else reply


register_backend("mock", lambda config: MockBackend(seed=config.seed))
