"""Deterministic raster painters for ingestion.

No PDF rasterizer or browser exists in the runtime environment, so the
first-page screenshot and table images are painted directly: text lines
and embedded images laid out top to bottom on a white canvas.  Output
depends only on the inputs, which keeps run manifests reproducible.
"""

from __future__ import annotations

from PIL import Image, ImageDraw, ImageFont


def _font(size: int) -> ImageFont.ImageFont:
    return ImageFont.load_default(size=size)


def _wrap(draw: ImageDraw.ImageDraw, text: str, font, max_width: int) -> list[str]:
    words = text.split()
    lines: list[str] = []
    current = ""
    for word in words:
        trial = f"{current} {word}".strip()
        if draw.textlength(trial, font=font) <= max_width or not current:
            current = trial
        else:
            lines.append(current)
            current = word
    if current:
        lines.append(current)
    return lines


def paint_page(out_path: str, title: str, body_lines: list[str], image_paths: list[str],
               size: tuple[int, int] = (850, 1100)) -> tuple[int, int]:
    """Paint a simplified page: title, body lines, then images stacked.

    Returns the painted (width, height).
    """
    w, h = size
    canvas = Image.new("RGB", size, "white")
    draw = ImageDraw.Draw(canvas)
    margin = int(w * 0.08)
    y = margin
    title_font = _font(34)
    body_font = _font(16)
    for line in _wrap(draw, title or "Untitled", title_font, w - 2 * margin)[:3]:
        draw.text((margin, y), line, fill="black", font=title_font)
        y += 42
    y += 12
    for raw_line in body_lines:
        for line in _wrap(draw, raw_line, body_font, w - 2 * margin):
            if y > h - margin:
                break
            draw.text((margin, y), line, fill=(40, 40, 40), font=body_font)
            y += 22
        y += 4
        if y > h - margin:
            break
    for path in image_paths:
        if y > h - margin - 60:
            break
        try:
            img = Image.open(path).convert("RGB")
        except Exception:
            continue
        target_w = int(w * 0.6)
        scale = target_w / img.width
        target_h = max(1, int(img.height * scale))
        img = img.resize((target_w, target_h), Image.LANCZOS)
        if y + target_h > h - margin:
            img = img.crop((0, 0, target_w, max(1, h - margin - y)))
        canvas.paste(img, ((w - target_w) // 2, y))
        y += img.height + 16
    canvas.save(out_path, "PNG")
    return size


def paint_table(out_path: str, rows: list[list[str]], caption: str = "") -> tuple[int, int]:
    """Render a text table as a bordered grid image.

    Returns the painted (width, height).
    """
    cols = max(len(r) for r in rows)
    cell_w, cell_h = 160, 34
    pad = 8
    cap_h = 30 if caption else 0
    w = cols * cell_w + 2 * pad
    h = len(rows) * cell_h + 2 * pad + cap_h
    canvas = Image.new("RGB", (w, h), "white")
    draw = ImageDraw.Draw(canvas)
    font = _font(14)
    if caption:
        draw.text((pad, pad), caption, fill="black", font=font)
    top = pad + cap_h
    for ri, row in enumerate(rows):
        for ci in range(cols):
            x0, y0 = pad + ci * cell_w, top + ri * cell_h
            draw.rectangle([x0, y0, x0 + cell_w, y0 + cell_h], outline=(120, 120, 120))
            text = row[ci] if ci < len(row) else ""
            if text:
                draw.text((x0 + 6, y0 + 8), text[:20], fill="black", font=font)
    canvas.save(out_path, "PNG")
    return (w, h)
