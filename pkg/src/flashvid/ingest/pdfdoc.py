"""Minimal PDF reader for paper ingestion.

Covers the slice of PDF 1.x this pipeline needs: classic cross-reference
tables (with /Prev chains), Flate-compressed content streams, simple
fonts, and image XObjects stored as DCT (JPEG passthrough) or Flate
(raw RGB/gray rasters).  Text is recovered from BT/ET blocks with
enough positioning to order lines and detect headings by font size.

Out of scope, by design: encrypted files, cross-reference streams,
CID/Type0 text, and vector graphics.  Files outside the supported
slice raise ParseError instead of silently degrading.
"""

from __future__ import annotations

import logging
import re
import zlib
from base64 import a85decode
from dataclasses import dataclass, field

from ..errors import ParseError

log = logging.getLogger(__name__)

_WS = b"\x00\t\n\x0c\r "
_DELIM = b"()<>[]{}/%"


class Name(str):
    """A PDF name token, kept distinct from string literals."""


@dataclass(frozen=True)
class Ref:
    num: int
    gen: int


@dataclass
class Stream:
    dict: dict
    raw: bytes


@dataclass
class PdfTextRun:
    page: int
    x: float
    y: float
    size: float
    text: str


@dataclass
class PdfImage:
    name: str
    page: int
    order: int
    width: int
    height: int
    data: bytes
    format: str  # jpg | png-source raster ("raw")
    mode: str = "RGB"


class _Lexer:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def skip_ws(self):
        d = self.data
        n = len(d)
        while self.pos < n:
            c = d[self.pos]
            if c in _WS:
                self.pos += 1
            elif c == 0x25:  # comment to end of line
                while self.pos < n and d[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                return

    def peek_keyword(self, kw: bytes) -> bool:
        self.skip_ws()
        return self.data.startswith(kw, self.pos)

    def expect_keyword(self, kw: bytes):
        if not self.peek_keyword(kw):
            raise ParseError(f"expected {kw!r} at offset {self.pos}")
        self.pos += len(kw)

    def read_token(self) -> bytes:
        self.skip_ws()
        d = self.data
        start = self.pos
        while self.pos < len(d) and d[self.pos] not in _WS and d[self.pos] not in _DELIM:
            self.pos += 1
        if self.pos == start:
            raise ParseError(f"bare delimiter at offset {self.pos}")
        return d[start:self.pos]

    def parse_object(self):
        self.skip_ws()
        d = self.data
        if self.pos >= len(d):
            raise ParseError("unexpected end of file")
        c = d[self.pos]
        if d.startswith(b"<<", self.pos):
            return self._parse_dict_or_stream()
        if c == 0x3C:  # hex string
            return self._parse_hex_string()
        if c == 0x28:  # literal string
            return self._parse_literal_string()
        if c == 0x2F:
            return self._parse_name()
        if c == 0x5B:
            return self._parse_array()
        tok = self.read_token()
        if tok == b"true":
            return True
        if tok == b"false":
            return False
        if tok == b"null":
            return None
        if re.fullmatch(rb"[+-]?\d+", tok):
            # lookahead for "num gen R"
            save = self.pos
            try:
                tok2 = self.read_token()
                tok3 = self.read_token()
                if re.fullmatch(rb"\d+", tok2) and tok3 == b"R":
                    return Ref(int(tok), int(tok2))
            except ParseError:
                pass
            self.pos = save
            return int(tok)
        if re.fullmatch(rb"[+-]?(\d+\.\d*|\.\d+|\d+)", tok):
            return float(tok)
        raise ParseError(f"unparseable token {tok[:20]!r} at offset {self.pos}")

    def _parse_name(self) -> Name:
        self.pos += 1
        d = self.data
        start = self.pos
        while self.pos < len(d) and d[self.pos] not in _WS and d[self.pos] not in _DELIM:
            self.pos += 1
        raw = d[start:self.pos]
        # #xx escapes inside names
        def unescape(m):
            return bytes([int(m.group(1), 16)])
        raw = re.sub(rb"#([0-9A-Fa-f]{2})", unescape, raw)
        return Name(raw.decode("latin-1"))

    def _parse_array(self) -> list:
        self.pos += 1
        out = []
        while True:
            self.skip_ws()
            if self.pos >= len(self.data):
                raise ParseError("unterminated array")
            if self.data[self.pos] == 0x5D:
                self.pos += 1
                return out
            out.append(self.parse_object())

    def _parse_literal_string(self) -> bytes:
        d = self.data
        self.pos += 1
        out = bytearray()
        depth = 1
        while self.pos < len(d):
            c = d[self.pos]
            self.pos += 1
            if c == 0x5C:  # backslash
                if self.pos >= len(d):
                    break
                e = d[self.pos]
                self.pos += 1
                mapping = {0x6E: 10, 0x72: 13, 0x74: 9, 0x62: 8, 0x66: 12}
                if e in mapping:
                    out.append(mapping[e])
                elif e in b"\r\n":
                    if e == 0x0D and self.pos < len(d) and d[self.pos] == 0x0A:
                        self.pos += 1
                elif 0x30 <= e <= 0x37:
                    oct_digits = chr(e)
                    for _ in range(2):
                        if self.pos < len(d) and 0x30 <= d[self.pos] <= 0x37:
                            oct_digits += chr(d[self.pos])
                            self.pos += 1
                    out.append(int(oct_digits, 8) & 0xFF)
                else:
                    out.append(e)
            elif c == 0x28:
                depth += 1
                out.append(c)
            elif c == 0x29:
                depth -= 1
                if depth == 0:
                    return bytes(out)
                out.append(c)
            else:
                out.append(c)
        raise ParseError("unterminated string literal")

    def _parse_hex_string(self) -> bytes:
        end = self.data.find(b">", self.pos)
        if end < 0:
            raise ParseError("unterminated hex string")
        hexdata = re.sub(rb"[^0-9A-Fa-f]", b"", self.data[self.pos + 1:end])
        self.pos = end + 1
        if len(hexdata) % 2:
            hexdata += b"0"
        return bytes.fromhex(hexdata.decode("ascii"))

    def _parse_dict_or_stream(self):
        self.pos += 2
        out: dict = {}
        while True:
            self.skip_ws()
            if self.data.startswith(b">>", self.pos):
                self.pos += 2
                break
            key = self.parse_object()
            if not isinstance(key, Name):
                raise ParseError(f"dictionary key is not a name at offset {self.pos}")
            out[str(key)] = self.parse_object()
        self.skip_ws()
        if self.data.startswith(b"stream", self.pos):
            self.pos += len(b"stream")
            if self.data.startswith(b"\r\n", self.pos):
                self.pos += 2
            elif self.data.startswith(b"\n", self.pos):
                self.pos += 1
            return Stream(out, b""), self.pos  # raw filled in by caller (needs /Length)
        return out


class PdfDocument:
    def __init__(self, data: bytes):
        self.data = data
        self.xref: dict[int, int] = {}
        self.trailer: dict = {}
        self._cache: dict[int, object] = {}
        self.title: str | None = None
        self.page_refs: list[Ref] = []
        self.runs: list[PdfTextRun] = []
        self.images: list[PdfImage] = []

    # -- object plumbing ------------------------------------------------

    def resolve(self, obj, depth: int = 0):
        if depth > 32:
            raise ParseError("reference chain too deep")
        if isinstance(obj, Ref):
            return self.resolve(self._load(obj.num), depth + 1)
        return obj

    def _load(self, num: int):
        if num in self._cache:
            return self._cache[num]
        if num not in self.xref:
            self._cache[num] = None
            return None
        lex = _Lexer(self.data, self.xref[num])
        try:
            lex.read_token()  # object number
            lex.read_token()  # generation
            lex.expect_keyword(b"obj")
            obj = lex.parse_object()
            if isinstance(obj, tuple) and isinstance(obj[0], Stream):
                stream, data_start = obj
                length = self.resolve(stream.dict.get("Length"))
                if isinstance(length, int) and 0 <= data_start + length <= len(self.data):
                    stream.raw = self.data[data_start:data_start + length]
                else:
                    end = self.data.find(b"endstream", data_start)
                    if end < 0:
                        raise ParseError(f"object {num}: unterminated stream")
                    stream.raw = self.data[data_start:end].rstrip(b"\r\n")
                obj = stream
        except ParseError:
            raise
        except Exception as exc:
            raise ParseError(f"object {num} unreadable: {exc}") from exc
        self._cache[num] = obj
        return obj

    def _parse_xref(self):
        tail = self.data[-2048:]
        m = None
        for m in re.finditer(rb"startxref\s+(\d+)", tail):
            pass
        if not m:
            self._fallback_scan()
            return
        offset = int(m.group(1))
        seen = set()
        while offset and offset not in seen:
            seen.add(offset)
            lex = _Lexer(self.data, offset)
            if not lex.peek_keyword(b"xref"):
                # cross-reference streams are out of scope
                self._fallback_scan()
                return
            lex.expect_keyword(b"xref")
            while True:
                lex.skip_ws()
                if lex.peek_keyword(b"trailer"):
                    break
                start = int(lex.read_token())
                count = int(lex.read_token())
                lex.skip_ws()
                for i in range(count):
                    entry = self.data[lex.pos:lex.pos + 20]
                    lex.pos += 20
                    if len(entry) < 18:
                        raise ParseError("truncated xref entry")
                    if entry[17:18] == b"n" and (start + i) not in self.xref:
                        self.xref[start + i] = int(entry[:10])
            lex.expect_keyword(b"trailer")
            trailer = lex.parse_object()
            if not isinstance(trailer, dict):
                raise ParseError("trailer is not a dictionary")
            for k, v in trailer.items():
                self.trailer.setdefault(k, v)
            offset = trailer.get("Prev")
        if not self.xref:
            raise ParseError("empty cross-reference table")

    def _fallback_scan(self):
        """Index objects by scanning for `N G obj` when the xref is unusable."""
        for m in re.finditer(rb"(?m)^\s*(\d+)\s+(\d+)\s+obj\b", self.data):
            self.xref.setdefault(int(m.group(1)), m.start())
        if not self.xref:
            raise ParseError("no indirect objects found")
        m = re.search(rb"trailer", self.data)
        if m:
            lex = _Lexer(self.data, m.end())
            try:
                t = lex.parse_object()
                if isinstance(t, dict):
                    self.trailer = t
            except ParseError:
                pass
        if "Root" not in self.trailer:
            # last resort: find the catalog by type
            for num in list(self.xref):
                obj = self._load(num)
                if isinstance(obj, dict) and obj.get("Type") == "Catalog":
                    self.trailer["Root"] = Ref(num, 0)
                    break

    # -- structure ------------------------------------------------------

    def _collect_pages(self):
        root = self.resolve(self.trailer.get("Root"))
        if not isinstance(root, dict):
            raise ParseError("missing document catalog")
        pages_obj = self.resolve(root.get("Pages"))
        if not isinstance(pages_obj, dict):
            raise ParseError("missing page tree")

        def walk(node_ref, node, depth=0):
            if depth > 64:
                raise ParseError("page tree too deep")
            ntype = node.get("Type")
            if ntype == "Page":
                self.page_refs.append(node_ref)
                return
            for kid in self.resolve(node.get("Kids", [])) or []:
                kid_obj = self.resolve(kid)
                if isinstance(kid_obj, dict):
                    walk(kid, kid_obj, depth + 1)

        walk(root.get("Pages"), pages_obj)
        if not self.page_refs:
            raise ParseError("document has no pages")

    def _read_info(self):
        info = self.resolve(self.trailer.get("Info"))
        if isinstance(info, dict):
            title = info.get("Title")
            if isinstance(title, bytes):
                self.title = _decode_text(title) or None

    # -- streams --------------------------------------------------------

    def stream_data(self, stream: Stream) -> bytes:
        filters = self.resolve(stream.dict.get("Filter"))
        if filters is None:
            return stream.raw
        if isinstance(filters, (Name, str)):
            filters = [filters]
        parms = self.resolve(stream.dict.get("DecodeParms"))
        if isinstance(parms, dict) or parms is None:
            parms = [parms] * len(filters)
        data = stream.raw
        for f, p in zip(filters, parms):
            f = str(f)
            if f == "FlateDecode":
                try:
                    data = zlib.decompress(data)
                except zlib.error as exc:
                    raise ParseError(f"flate stream corrupt: {exc}") from exc
                data = _apply_predictor(data, self.resolve(p) if p else None, self)
            elif f == "ASCII85Decode":
                text = re.sub(rb"\s", b"", data)
                text = text.removeprefix(b"<~").removesuffix(b"~>")
                try:
                    data = a85decode(text)
                except ValueError as exc:
                    raise ParseError(f"ascii85 stream corrupt: {exc}") from exc
            elif f == "ASCIIHexDecode":
                text = re.sub(rb"[^0-9A-Fa-f]", b"", data.split(b">")[0])
                if len(text) % 2:
                    text += b"0"
                data = bytes.fromhex(text.decode("ascii"))
            elif f == "DCTDecode":
                return data  # JPEG payload, returned as-is
            else:
                raise ParseError(f"unsupported stream filter {f}")
        return data

    # -- content --------------------------------------------------------

    def parse_content(self):
        for page_index, page_ref in enumerate(self.page_refs):
            page = self.resolve(page_ref)
            resources = self.resolve(page.get("Resources")) or {}
            xobjects = self.resolve(resources.get("XObject")) or {}
            content = self.resolve(page.get("Contents"))
            chunks = []
            for item in content if isinstance(content, list) else [content]:
                item = self.resolve(item)
                if isinstance(item, Stream):
                    chunks.append(self.stream_data(item))
            if chunks:
                self._parse_content_stream(b"\n".join(chunks), page_index, xobjects)

    def _parse_content_stream(self, content: bytes, page_index: int, xobjects: dict):
        lex = _Lexer(content, 0)
        stack: list = []
        font_size = 0.0
        tm = (1, 0, 0, 1, 0, 0)
        tlm = tm
        leading = 0.0
        order = len(self.images)
        n = len(content)
        while True:
            lex.skip_ws()
            if lex.pos >= n:
                break
            c = content[lex.pos]
            if c in b"/([<" or c == 0x3C or (0x30 <= c <= 0x39) or c in b"+-.":
                try:
                    stack.append(lex.parse_object())
                except ParseError:
                    lex.pos += 1
                continue
            op = lex.read_token()
            if op == b"Tf" and len(stack) >= 2:
                font_size = float(stack[-1])
            elif op == b"BT":
                tm = tlm = (1, 0, 0, 1, 0, 0)
            elif op == b"Tm" and len(stack) >= 6:
                tm = tlm = tuple(float(v) for v in stack[-6:])
            elif op in (b"Td", b"TD") and len(stack) >= 2:
                tx, ty = float(stack[-2]), float(stack[-1])
                if op == b"TD":
                    leading = -ty
                a, b_, cc, d, e, f = tlm
                tlm = (a, b_, cc, d, a * tx + cc * ty + e, b_ * tx + d * ty + f)
                tm = tlm
            elif op == b"TL" and stack:
                leading = float(stack[-1])
            elif op == b"T*":
                a, b_, cc, d, e, f = tlm
                tlm = (a, b_, cc, d, cc * -leading + e, d * -leading + f)
                tm = tlm
            elif op in (b"Tj", b"'", b'"') and stack:
                if op != b"Tj":
                    a, b_, cc, d, e, f = tlm
                    tlm = (a, b_, cc, d, cc * -leading + e, d * -leading + f)
                    tm = tlm
                raw = stack[-1]
                if isinstance(raw, bytes):
                    self._emit_text(raw, page_index, tm, font_size)
            elif op == b"TJ" and stack and isinstance(stack[-1], list):
                parts = [p for p in stack[-1] if isinstance(p, bytes)]
                if parts:
                    self._emit_text(b"".join(parts), page_index, tm, font_size)
            elif op == b"Do" and stack and isinstance(stack[-1], Name):
                name = str(stack[-1])
                xref = xobjects.get(name)
                if xref is not None:
                    self._extract_image(name, xref, page_index, order)
                    order += 1
            elif op == b"BI":
                # inline images carry raw binary; skip to the terminator
                end = content.find(b"EI", lex.pos)
                lex.pos = len(content) if end < 0 else end + 2
            stack.clear()

    def _emit_text(self, raw: bytes, page_index: int, tm, font_size: float):
        text = _decode_text(raw)
        if not text.strip():
            return
        a, b_, cc, d, e, f = tm
        scale = max(abs(a), abs(d)) or 1.0
        self.runs.append(PdfTextRun(page=page_index, x=e, y=f, size=font_size * scale, text=text))

    def _extract_image(self, name: str, xref, page_index: int, order: int):
        obj = self.resolve(xref)
        if not isinstance(obj, Stream) or obj.dict.get("Subtype") != "Image":
            return
        if any(img.name == name and img.page == page_index for img in self.images):
            return
        width = int(self.resolve(obj.dict.get("Width", 0)))
        height = int(self.resolve(obj.dict.get("Height", 0)))
        filters = self.resolve(obj.dict.get("Filter"))
        if isinstance(filters, (Name, str)):
            filters = [filters]
        filters = [str(f) for f in (filters or [])]
        if "DCTDecode" in filters:
            try:
                payload = self.stream_data(obj)  # runs any wrapping filters, stops at DCT
            except ParseError:
                log.warning("image %s on page %d undecodable, skipped", name, page_index)
                return
            self.images.append(PdfImage(name, page_index, order, width, height, payload, "jpg"))
            return
        cs = self.resolve(obj.dict.get("ColorSpace"))
        bpc = self.resolve(obj.dict.get("BitsPerComponent", 8))
        if "FlateDecode" in filters and bpc == 8 and str(cs) in ("DeviceRGB", "DeviceGray"):
            try:
                data = self.stream_data(obj)
            except ParseError:
                log.warning("image %s on page %d undecodable, skipped", name, page_index)
                return
            mode = "RGB" if str(cs) == "DeviceRGB" else "L"
            expected = width * height * (3 if mode == "RGB" else 1)
            if len(data) >= expected:
                self.images.append(PdfImage(name, page_index, order, width, height, data[:expected], "raw", mode))
                return
        log.warning("image %s on page %d uses an unsupported encoding, skipped", name, page_index)

    # -- public ---------------------------------------------------------

    @classmethod
    def parse(cls, data: bytes) -> "PdfDocument":
        if not data.startswith(b"%PDF-"):
            raise ParseError("not a PDF file")
        doc = cls(data)
        doc._parse_xref()
        doc._read_info()
        doc._collect_pages()
        doc.parse_content()
        return doc

    def lines(self) -> list[tuple[int, float, float, str]]:
        """Text runs grouped into lines: (page, y, max font size, text)."""
        buckets: dict[tuple[int, int], list[PdfTextRun]] = {}
        for run in self.runs:
            buckets.setdefault((run.page, round(run.y)), []).append(run)
        out = []
        for (page, y), runs in buckets.items():
            runs.sort(key=lambda r: r.x)
            text = " ".join(r.text for r in runs).strip()
            if text:
                out.append((page, float(y), max(r.size for r in runs), text))
        out.sort(key=lambda t: (t[0], -t[1]))
        return out


def _decode_text(raw: bytes) -> str:
    if raw.startswith(b"\xfe\xff"):
        try:
            return raw[2:].decode("utf-16-be", errors="replace")
        except Exception:
            return ""
    if raw.count(b"\x00") > len(raw) // 4:
        # CID-keyed text, not supported
        return ""
    try:
        return raw.decode("cp1252")
    except UnicodeDecodeError:
        return raw.decode("latin-1", errors="replace")


def _apply_predictor(data: bytes, parms, doc) -> bytes:
    if not isinstance(parms, dict):
        return data
    predictor = doc.resolve(parms.get("Predictor", 1))
    if not isinstance(predictor, int) or predictor < 10:
        return data
    columns = int(doc.resolve(parms.get("Columns", 1)))
    colors = int(doc.resolve(parms.get("Colors", 1)))
    bpc = int(doc.resolve(parms.get("BitsPerComponent", 8)))
    bpp = max(1, colors * bpc // 8)
    row_len = columns * bpp
    out = bytearray()
    prev = bytearray(row_len)
    pos = 0
    while pos + 1 + row_len <= len(data):
        ftype = data[pos]
        row = bytearray(data[pos + 1:pos + 1 + row_len])
        pos += 1 + row_len
        if ftype == 1:
            for i in range(bpp, row_len):
                row[i] = (row[i] + row[i - bpp]) & 0xFF
        elif ftype == 2:
            for i in range(row_len):
                row[i] = (row[i] + prev[i]) & 0xFF
        elif ftype == 3:
            for i in range(row_len):
                left = row[i - bpp] if i >= bpp else 0
                row[i] = (row[i] + (left + prev[i]) // 2) & 0xFF
        elif ftype == 4:
            for i in range(row_len):
                left = row[i - bpp] if i >= bpp else 0
                up = prev[i]
                ul = prev[i - bpp] if i >= bpp else 0
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                best = left if pa <= pb and pa <= pc else (up if pb <= pc else ul)
                row[i] = (row[i] + best) & 0xFF
        out.extend(row)
        prev = row
    return bytes(out)
