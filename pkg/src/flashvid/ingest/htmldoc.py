"""HTML text, image, and table extraction using the stdlib parser."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

_HEADINGS = {"h1", "h2", "h3"}
_SKIP = {"script", "style", "nav", "header", "footer"}


@dataclass
class HtmlImageRef:
    src: str
    alt: str = ""


@dataclass
class HtmlTable:
    rows: list[list[str]] = field(default_factory=list)
    caption: str = ""


@dataclass
class HtmlPaper:
    title: str = ""
    sections: list[tuple[str, str]] = field(default_factory=list)
    images: list[HtmlImageRef] = field(default_factory=list)
    tables: list[HtmlTable] = field(default_factory=list)


class _Extractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.paper = HtmlPaper()
        self._skip_depth = 0
        self._capture: list[str] | None = None
        self._heading: str | None = None
        self._pending_heading = ""
        self._body: list[str] = []
        self._in_title = False
        self._table: HtmlTable | None = None
        self._row: list[str] | None = None
        self._cell: list[str] | None = None
        self._in_caption = False

    # -- tags -----------------------------------------------------------

    def handle_starttag(self, tag, attrs):
        attrs = dict(attrs)
        if tag in _SKIP:
            self._skip_depth += 1
            return
        if self._skip_depth:
            return
        if tag == "title":
            self._in_title = True
        elif tag in _HEADINGS:
            self._flush_section()
            self._capture = []
            self._heading = tag
        elif tag == "img":
            src = attrs.get("src", "")
            if src:
                ref = HtmlImageRef(src=src, alt=attrs.get("alt", "") or "")
                if self._table is None:
                    self.paper.images.append(ref)
        elif tag == "table":
            self._table = HtmlTable()
        elif tag == "caption" and self._table is not None:
            self._in_caption = True
        elif tag == "tr" and self._table is not None:
            self._row = []
        elif tag in ("td", "th") and self._row is not None:
            self._cell = []

    def handle_endtag(self, tag):
        if tag in _SKIP:
            self._skip_depth = max(0, self._skip_depth - 1)
            return
        if tag == "title":
            self._in_title = False
        elif tag in _HEADINGS and self._capture is not None:
            text = _collapse(" ".join(self._capture))
            self._capture = None
            self._heading = None
            if text:
                self._pending_heading = text
                if not self.paper.title:
                    self.paper.title = text
        elif tag in ("td", "th") and self._cell is not None and self._row is not None:
            self._row.append(_collapse(" ".join(self._cell)))
            self._cell = None
        elif tag == "tr" and self._row is not None and self._table is not None:
            if any(self._row):
                self._table.rows.append(self._row)
            self._row = None
        elif tag == "caption":
            self._in_caption = False
        elif tag == "table" and self._table is not None:
            if self._table.rows:
                self.paper.tables.append(self._table)
            self._table = None

    def handle_data(self, data):
        if self._skip_depth:
            return
        if self._in_title:
            if not self.paper.title:
                self.paper.title = _collapse(data)
            return
        if self._in_caption and self._table is not None:
            self._table.caption = _collapse(self._table.caption + " " + data)
            return
        if self._cell is not None:
            self._cell.append(data)
            return
        if self._table is not None:
            return
        if self._capture is not None:
            self._capture.append(data)
        elif data.strip():
            self._body.append(data)

    # -- sections -------------------------------------------------------

    def _flush_section(self):
        text = _collapse(" ".join(self._body))
        self._body = []
        if text:
            self.paper.sections.append((self._pending_heading, text))
        elif self._pending_heading:
            self.paper.sections.append((self._pending_heading, ""))
        self._pending_heading = ""

    def close(self):
        super().close()
        self._flush_section()
        # a heading with no body still closes its section
        if self._pending_heading:
            self.paper.sections.append((self._pending_heading, ""))
            self._pending_heading = ""


def _collapse(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def parse_html(text: str) -> HtmlPaper:
    extractor = _Extractor()
    extractor.feed(text)
    extractor.close()
    paper = extractor.paper
    # drop the title heading's empty section if it leads
    paper.sections = [(h, t) for h, t in paper.sections if t or h != paper.title]
    return paper


def find_image_srcs(text: str) -> list[str]:
    """Just the image sources, for the fetch stage's media download."""
    return [ref.src for ref in parse_html(text).images]
