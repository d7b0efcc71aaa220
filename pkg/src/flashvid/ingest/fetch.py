"""Fetch a paper from a URL, an arXiv-style identifier, or a local file.

The result is a RawBundle persisted under ``<workdir>/<paper_id>/raw/``:
the source documents plus any images an HTML page references, so the
extraction stage never touches the network.
"""

from __future__ import annotations

import logging
import os
import re
import shutil
from dataclasses import dataclass, field
from urllib.parse import urljoin, urlparse

import requests

from ..errors import NetworkError, NotFound, UnsupportedFormat
from ..workdir import PaperWorkdir, safe_paper_id
from .htmldoc import find_image_srcs

log = logging.getLogger(__name__)

_ARXIV_ID = re.compile(r"^(?:arXiv:)?(\d{4}\.\d{4,5})(v\d+)?$")
_TIMEOUT = 30


@dataclass
class RawBundle:
    paper_id: str
    raw_dir: str
    html_path: str | None = None
    pdf_path: str | None = None
    media: dict[str, str] = field(default_factory=dict)  # source src -> local path
    source_ref: str = ""


def _get(url: str) -> requests.Response:
    try:
        resp = requests.get(url, timeout=_TIMEOUT)
    except requests.RequestException as exc:
        raise NetworkError(f"cannot reach {url}: {exc}") from exc
    if resp.status_code == 404:
        raise NotFound(f"{url} resolves to nothing")
    if resp.status_code >= 400:
        raise NetworkError(f"{url} returned HTTP {resp.status_code}")
    return resp


def _looks_like_pdf(content: bytes, content_type: str) -> bool:
    return content[:5] == b"%PDF-" or "pdf" in content_type.lower()


def _download_media(html_text: str, base_url: str, raw_dir: str) -> dict[str, str]:
    media: dict[str, str] = {}
    media_dir = os.path.join(raw_dir, "media")
    for i, src in enumerate(find_image_srcs(html_text)):
        url = urljoin(base_url, src)
        try:
            resp = _get(url)
        except (NetworkError, NotFound) as exc:
            log.warning("media %s skipped: %s", src, exc)
            continue
        os.makedirs(media_dir, exist_ok=True)
        ext = os.path.splitext(urlparse(url).path)[1] or ".bin"
        local = os.path.join(media_dir, f"m{i}{ext}")
        with open(local, "wb") as fh:
            fh.write(resp.content)
        media[src] = local
    return media


def fetch_paper(source_ref: str, workdir_root: str, config) -> RawBundle:
    """Resolve a source reference and persist its documents locally.

    Args:
        source_ref: local file path, http(s) URL, or arXiv-style id.
        workdir_root: root directory for per-paper working directories.
        config: pipeline config (supplies the arXiv base URL).

    Returns:
        RawBundle with at least one of html or pdf set.
    """
    if os.path.exists(source_ref):
        return _fetch_local(source_ref, workdir_root)
    if source_ref.startswith(("http://", "https://")):
        return _fetch_url(source_ref, workdir_root)
    m = _ARXIV_ID.match(source_ref.strip())
    if m:
        ident = m.group(1) + (m.group(2) or "")
        base = config.arxiv_base_url.rstrip("/")
        return _fetch_arxiv(ident, base, workdir_root)
    raise NotFound(f"source {source_ref!r} is neither a file, a URL, nor a recognizable identifier")


def _fetch_local(path: str, workdir_root: str) -> RawBundle:
    paper_id = safe_paper_id(path)
    wd = PaperWorkdir(workdir_root, paper_id)
    raw_dir = wd.ensure("raw")
    lower = path.lower()
    bundle = RawBundle(paper_id=paper_id, raw_dir=raw_dir, source_ref=path)
    if lower.endswith(".pdf"):
        dest = os.path.join(raw_dir, "paper.pdf")
        shutil.copyfile(path, dest)
        bundle.pdf_path = dest
    elif lower.endswith((".html", ".htm")):
        dest = os.path.join(raw_dir, "paper.html")
        shutil.copyfile(path, dest)
        bundle.html_path = dest
        with open(path, "r", encoding="utf-8", errors="replace") as fh:
            html_text = fh.read()
        src_dir = os.path.dirname(os.path.abspath(path))
        media_dir = os.path.join(raw_dir, "media")
        for i, src in enumerate(find_image_srcs(html_text)):
            candidate = os.path.normpath(os.path.join(src_dir, src))
            if os.path.exists(candidate):
                os.makedirs(media_dir, exist_ok=True)
                local = os.path.join(media_dir, f"m{i}{os.path.splitext(candidate)[1]}")
                shutil.copyfile(candidate, local)
                bundle.media[src] = local
    else:
        raise UnsupportedFormat(f"cannot ingest {path!r}: not a PDF or HTML file")
    return bundle


def _fetch_url(url: str, workdir_root: str) -> RawBundle:
    paper_id = safe_paper_id(url)
    wd = PaperWorkdir(workdir_root, paper_id)
    raw_dir = wd.ensure("raw")
    resp = _get(url)
    bundle = RawBundle(paper_id=paper_id, raw_dir=raw_dir, source_ref=url)
    if _looks_like_pdf(resp.content, resp.headers.get("content-type", "")):
        bundle.pdf_path = os.path.join(raw_dir, "paper.pdf")
        with open(bundle.pdf_path, "wb") as fh:
            fh.write(resp.content)
    else:
        bundle.html_path = os.path.join(raw_dir, "paper.html")
        with open(bundle.html_path, "wb") as fh:
            fh.write(resp.content)
        bundle.media = _download_media(resp.text, url, raw_dir)
    return bundle


def _fetch_arxiv(ident: str, base: str, workdir_root: str) -> RawBundle:
    paper_id = safe_paper_id(ident)
    wd = PaperWorkdir(workdir_root, paper_id)
    raw_dir = wd.ensure("raw")
    bundle = RawBundle(paper_id=paper_id, raw_dir=raw_dir, source_ref=ident)
    abs_url = f"{base}/abs/{ident}"
    pdf_url = f"{base}/pdf/{ident}"
    html_err = pdf_err = None
    try:
        resp = _get(abs_url)
        bundle.html_path = os.path.join(raw_dir, "paper.html")
        with open(bundle.html_path, "wb") as fh:
            fh.write(resp.content)
        bundle.media = _download_media(resp.text, abs_url, raw_dir)
    except (NetworkError, NotFound) as exc:
        html_err = exc
    try:
        resp = _get(pdf_url)
        if resp.content[:5] == b"%PDF-":
            bundle.pdf_path = os.path.join(raw_dir, "paper.pdf")
            with open(bundle.pdf_path, "wb") as fh:
                fh.write(resp.content)
    except (NetworkError, NotFound) as exc:
        pdf_err = exc
    if not bundle.html_path and not bundle.pdf_path:
        if isinstance(html_err, NotFound) and isinstance(pdf_err, NotFound):
            raise NotFound(f"identifier {ident!r} resolves to nothing")
        raise UnsupportedFormat(f"neither HTML nor PDF obtained for {ident!r} ({html_err}; {pdf_err})")
    return bundle
