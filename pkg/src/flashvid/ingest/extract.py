"""Turn a fetched RawBundle into PaperAssets.

Text comes from the HTML when present (cleaner section structure),
otherwise from PDF lines segmented by font size.  Figures come from
whichever document supplied them; tables found in HTML are rendered to
images.  Every successful extraction also paints the `first_page`
screenshot and writes a manifest that round-trips to the same asset
list.
"""

from __future__ import annotations

import io
import logging
import os
import re

from PIL import Image

from ..errors import EmptyDocument, ParseError
from ..jsonio import read_json, write_json
from ..types import ImageAsset, PaperAssets
from ..workdir import PaperWorkdir
from .fetch import RawBundle
from .htmldoc import parse_html
from .painting import paint_page, paint_table
from .pdfdoc import PdfDocument

log = logging.getLogger(__name__)

MANIFEST_SCHEMA_VERSION = 1
MIN_FIGURE_PX = 64

_CAPTION_RE = re.compile(r"^(Figure|Fig\.?|Table)\s+\d+", re.IGNORECASE)
_HEADING_RATIO = 1.15


def _pdf_sections(doc: PdfDocument) -> tuple[str, list[tuple[str, str]]]:
    lines = doc.lines()
    if not lines:
        return doc.title or "", []
    sizes = sorted(size for _, _, size, _ in lines)
    median = sizes[len(sizes) // 2]
    title = doc.title or ""
    title_line_idx = None
    if not title:
        # largest text on the first page
        first_page = [(i, ln) for i, ln in enumerate(lines) if ln[0] == 0]
        if first_page:
            title_line_idx, best = max(first_page, key=lambda t: t[1][2])
            title = best[3]
    sections: list[tuple[str, str]] = []
    heading = ""
    body: list[str] = []
    for i, (page, _y, size, text) in enumerate(lines):
        if i == title_line_idx or (title and text == title):
            continue
        if _CAPTION_RE.match(text):
            continue
        if size >= median * _HEADING_RATIO:
            if body or heading:
                sections.append((heading, " ".join(body)))
            heading = text
            body = []
        else:
            body.append(text)
    if body or heading:
        sections.append((heading, " ".join(body)))
    sections = [(h, t) for h, t in sections if h or t]
    return title, sections


def _pdf_captions(doc: PdfDocument) -> dict[int, list[str]]:
    """Caption lines per page, in reading order."""
    captions: dict[int, list[str]] = {}
    for page, _y, _size, text in doc.lines():
        if _CAPTION_RE.match(text):
            captions.setdefault(page, []).append(text)
    return captions


def _save_pdf_images(doc: PdfDocument, assets_dir: str) -> list[tuple[ImageAsset, int]]:
    out: list[tuple[ImageAsset, int]] = []
    captions = _pdf_captions(doc)
    used: dict[int, int] = {}
    n = 0
    for img in sorted(doc.images, key=lambda im: im.order):
        if img.format == "jpg":
            try:
                pil = Image.open(io.BytesIO(img.data))
                pil.load()
            except Exception:
                log.warning("embedded jpeg %s does not decode, skipped", img.name)
                continue
        else:
            pil = Image.frombytes(img.mode, (img.width, img.height), img.data)
        if pil.width < MIN_FIGURE_PX or pil.height < MIN_FIGURE_PX:
            log.info("image %s (%dx%d) discarded as decorative", img.name, pil.width, pil.height)
            continue
        n += 1
        ext = "jpg" if img.format == "jpg" else "png"
        path = os.path.join(assets_dir, f"fig_{n}.{ext}")
        if img.format == "jpg":
            with open(path, "wb") as fh:
                fh.write(img.data)
        else:
            pil.convert("RGB").save(path, "PNG")
        idx = used.get(img.page, 0)
        used[img.page] = idx + 1
        caps = captions.get(img.page, [])
        caption = caps[idx] if idx < len(caps) else None
        out.append((ImageAsset(f"fig_{n}", path, "figure", pil.width, pil.height, caption), img.page))
    return out


def _save_html_images(bundle: RawBundle, refs, assets_dir: str) -> list[ImageAsset]:
    out = []
    n = 0
    for ref in refs:
        local = bundle.media.get(ref.src)
        if not local or not os.path.exists(local):
            continue
        try:
            pil = Image.open(local)
            pil.load()
        except Exception:
            log.warning("media %s does not decode, skipped", ref.src)
            continue
        if pil.width < MIN_FIGURE_PX or pil.height < MIN_FIGURE_PX:
            continue
        n += 1
        ext = (os.path.splitext(local)[1] or ".png").lstrip(".").lower()
        if ext not in ("jpg", "jpeg", "png"):
            ext = "png"
        path = os.path.join(assets_dir, f"fig_{n}.{ext}")
        if ext == "png":
            pil.convert("RGB").save(path, "PNG")
        else:
            with open(local, "rb") as src, open(path, "wb") as dst:
                dst.write(src.read())
        out.append(ImageAsset(f"fig_{n}", path, "figure", pil.width, pil.height, ref.alt or None))
    return out


def extract_assets(bundle: RawBundle, workdir_root: str, config) -> PaperAssets:
    """Extract text, figures, tables, and the first-page screenshot.

    Args:
        bundle: fetched documents for one paper.
        workdir_root: root of per-paper working directories.
        config: pipeline config.

    Returns:
        PaperAssets with a manifest written to disk.
    """
    wd = PaperWorkdir(workdir_root, bundle.paper_id)
    assets_dir = wd.ensure("assets")

    pdf_doc = None
    if bundle.pdf_path:
        with open(bundle.pdf_path, "rb") as fh:
            pdf_doc = PdfDocument.parse(fh.read())
    html_paper = None
    if bundle.html_path:
        with open(bundle.html_path, "r", encoding="utf-8", errors="replace") as fh:
            html_paper = parse_html(fh.read())
    if pdf_doc is None and html_paper is None:
        raise ParseError("bundle contains no parseable document")

    # text: HTML preferred for structure
    title, sections = "", []
    if html_paper and any(t for _, t in html_paper.sections):
        title = html_paper.title
        sections = [(h, t) for h, t in html_paper.sections if t]
    elif pdf_doc is not None:
        title, sections = _pdf_sections(pdf_doc)
    if not any(t for _, t in sections):
        raise EmptyDocument("no extractable text")
    title = title or "Untitled"

    # figures
    page_of: dict[str, int] = {}
    if html_paper and html_paper.images and bundle.media:
        images = _save_html_images(bundle, html_paper.images, assets_dir)
    elif pdf_doc is not None:
        with_pages = _save_pdf_images(pdf_doc, assets_dir)
        images = [a for a, _ in with_pages]
        page_of = {a.asset_id: p for a, p in with_pages}
    else:
        images = []

    # tables from HTML, rendered as images
    if html_paper:
        for i, table in enumerate(html_paper.tables, start=1):
            path = os.path.join(assets_dir, f"table_{i}.png")
            w, h = paint_table(path, table.rows, table.caption)
            images.append(ImageAsset(f"table_{i}", path, "table", w, h, table.caption or None))

    # first-page screenshot: PDF when available, else the HTML viewport
    shot_path = os.path.join(assets_dir, "first_page.png")
    if pdf_doc is not None:
        page0_lines = [text for page, _y, _size, text in pdf_doc.lines() if page == 0]
        page0_images = [a.path for a in images if page_of.get(a.asset_id) == 0]
        w, h = paint_page(shot_path, title, page0_lines[:30], page0_images)
    else:
        body = [h_ for h_, _ in sections[:1]] + [t for _, t in sections[:2]]
        first_images = [images[0].path] if images else []
        w, h = paint_page(shot_path, title, body, first_images)
    first_page = ImageAsset("first_page", shot_path, "screenshot", w, h, None)

    all_assets = images + [first_page]
    ids = [a.asset_id for a in all_assets]
    assert len(ids) == len(set(ids)), "asset ids must be unique"

    # asset paths are stored relative to the manifest so a working
    # directory can move (or be recreated elsewhere) without invalidation
    base = os.path.dirname(wd.manifest_path)
    entries = []
    for a in all_assets:
        d = a.to_dict()
        d["path"] = os.path.relpath(a.path, base)
        entries.append(d)
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "paper_id": bundle.paper_id,
        "title": title,
        "sections": [[h, t] for h, t in sections],
        "assets": entries,
    }
    write_json(wd.manifest_path, manifest)
    return PaperAssets(
        paper_id=bundle.paper_id,
        title=title,
        body_text=sections,
        images=all_assets,
        first_page=first_page,
        manifest_path=wd.manifest_path,
    )


def load_assets(manifest_path: str) -> PaperAssets:
    """Read a manifest back into PaperAssets (round-trip identity)."""
    data = read_json(manifest_path)
    base = os.path.dirname(os.path.abspath(manifest_path))
    assets = []
    for d in data["assets"]:
        asset = ImageAsset.from_dict(d)
        if not os.path.isabs(asset.path):
            asset.path = os.path.normpath(os.path.join(base, asset.path))
        assets.append(asset)
    screenshots = [a for a in assets if a.kind == "screenshot"]
    if len(screenshots) != 1 or screenshots[0].asset_id != "first_page":
        raise ParseError("manifest must contain exactly one first_page screenshot")
    return PaperAssets(
        paper_id=data["paper_id"],
        title=data["title"],
        body_text=[(h, t) for h, t in data["sections"]],
        images=assets,
        first_page=screenshots[0],
        manifest_path=manifest_path,
    )
