"""Geometry over OCR output: resize arithmetic, merging words into lines
and paragraphs by box relations, and rasterizing dilated text masks.

Merging is driven entirely by bbox geometry in reading order. Thresholds
scale with the document's own statistics (median word height for gaps
inside a line, median line height for paragraph breaks), so the result is
invariant under translation and uniform scaling.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .artifacts import atomic_write_bytes
from .errors import ValidationError
from .ingest import Quad, WordBox, quad_bbox

BBox = tuple[float, float, float, float]


@dataclass(frozen=True)
class LayoutParams:
    line_overlap_min: float = 0.5
    word_gap_factor: float = 1.5
    para_gap_factor: float = 1.5
    min_confidence: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.line_overlap_min <= 1.0:
            raise ValidationError(f"line_overlap_min={self.line_overlap_min} outside (0, 1]")
        if self.word_gap_factor <= 0.0 or self.para_gap_factor <= 0.0:
            raise ValidationError("gap factors must be positive")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValidationError(f"min_confidence={self.min_confidence} outside [0, 1]")


@dataclass
class Paragraph:
    text: str
    bbox: BBox
    line_count: int
    word_count: int


def downsample_dims(width_px: int, height_px: int, target: int = 384) -> tuple[int, int]:
    """New (width, height) with the short edge resized to `target` only
    when it exceeds the target; smaller images pass through untouched.
    The long edge keeps the aspect ratio, rounded to the nearest pixel."""
    if width_px < 1 or height_px < 1:
        raise ValidationError(f"bad dimensions {width_px}x{height_px}")
    if target < 1:
        raise ValidationError(f"bad target {target}")
    short = min(width_px, height_px)
    if short <= target:
        return (width_px, height_px)
    scale = target / short
    if width_px <= height_px:
        return (target, max(1, round(height_px * scale)))
    return (max(1, round(width_px * scale)), target)


def scale_boxes(words: Sequence[WordBox], sx: float, sy: float) -> list[WordBox]:
    """Scale every quad by (sx, sy); text, confidence, engine unchanged."""
    if sx <= 0.0 or sy <= 0.0:
        raise ValidationError(f"scale factors must be positive, got ({sx}, {sy})")
    out = []
    for w in words:
        quad = tuple((x * sx, y * sy) for x, y in w.quad)
        out.append(WordBox(text=w.text, confidence=w.confidence, quad=quad, engine=w.engine))
    return out


@dataclass
class _Line:
    text: str
    bbox: BBox
    word_count: int


def _bbox_union(a: BBox, b: BBox) -> BBox:
    return (min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3]))


def _same_line(a: BBox, b: BBox, overlap_min: float, max_gap: float) -> bool:
    overlap = min(a[3], b[3]) - max(a[1], b[1])
    min_h = min(a[3] - a[1], b[3] - b[1])
    if overlap < overlap_min * min_h:
        return False
    gap = max(a[0], b[0]) - min(a[2], b[2])  # <= 0 when the spans overlap
    return gap <= max_gap


def merge_words(words: Sequence[WordBox], params: LayoutParams) -> list[Paragraph]:
    """Group words into lines, lines into paragraphs.

    Words join a line when their boxes overlap vertically by at least
    line_overlap_min of the shorter box and the horizontal gap is at most
    word_gap_factor times the median word height (chained transitively).
    A line joins a paragraph when the vertical gap to the paragraph's last
    line is at most para_gap_factor times the median line height and the
    horizontal spans overlap. Lines read left to right, paragraphs top to
    bottom; every surviving word lands in exactly one paragraph.
    """
    kept = [w for w in words if w.confidence >= params.min_confidence]
    if not kept:
        return []

    boxes = [quad_bbox(w.quad) for w in kept]
    med_word_h = statistics.median(b[3] - b[1] for b in boxes)
    max_gap = params.word_gap_factor * med_word_h

    # transitive line grouping via union-find
    parent = list(range(len(kept)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(kept)):
        for j in range(i + 1, len(kept)):
            if _same_line(boxes[i], boxes[j], params.line_overlap_min, max_gap):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[int]] = {}
    for i in range(len(kept)):
        groups.setdefault(find(i), []).append(i)

    lines: list[_Line] = []
    for idxs in groups.values():
        idxs.sort(key=lambda i: (boxes[i][0], boxes[i][1], i))
        bbox = boxes[idxs[0]]
        for i in idxs[1:]:
            bbox = _bbox_union(bbox, boxes[i])
        lines.append(
            _Line(
                text=" ".join(kept[i].text for i in idxs),
                bbox=bbox,
                word_count=len(idxs),
            )
        )

    med_line_h = statistics.median(ln.bbox[3] - ln.bbox[1] for ln in lines)
    max_para_gap = params.para_gap_factor * med_line_h
    lines.sort(key=lambda ln: (ln.bbox[1], ln.bbox[0]))

    paragraphs: list[list[_Line]] = []
    for line in lines:
        placed = False
        for para in paragraphs:
            last = para[-1]
            vgap = line.bbox[1] - last.bbox[3]
            hoverlap = min(last.bbox[2], line.bbox[2]) - max(last.bbox[0], line.bbox[0])
            if vgap <= max_para_gap and hoverlap > 0.0:
                para.append(line)
                placed = True
                break
        if not placed:
            paragraphs.append([line])

    out = []
    for para in paragraphs:
        bbox = para[0].bbox
        for ln in para[1:]:
            bbox = _bbox_union(bbox, ln.bbox)
        out.append(
            Paragraph(
                text="\n".join(ln.text for ln in para),
                bbox=bbox,
                line_count=len(para),
                word_count=sum(ln.word_count for ln in para),
            )
        )
    out.sort(key=lambda p: (p.bbox[1], p.bbox[0]))
    return out


def concat_paragraphs(paragraphs: Sequence[Paragraph]) -> str:
    """Paragraph texts joined by blank lines, already in reading order."""
    return "\n\n".join(p.text for p in paragraphs)


def render_text_mask(
    width_px: int,
    height_px: int,
    quads: Sequence[Quad],
    dilation_px: int = 2,
) -> np.ndarray:
    """Boolean (height, width) mask of text regions.

    A pixel is set when its center lies inside a quad or within
    dilation_px of a quad in Chebyshev distance, i.e. each quad grows by a
    square structuring element. Evaluated in closed form per pixel center
    rather than by erosion/dilation passes, so the dilation is exact.
    """
    if width_px < 1 or height_px < 1:
        raise ValidationError(f"bad mask dimensions {width_px}x{height_px}")
    if dilation_px < 0:
        raise ValidationError(f"dilation_px={dilation_px} must be >= 0")
    mask = np.zeros((height_px, width_px), dtype=bool)
    d = float(dilation_px)
    for quad in quads:
        xs = [p[0] for p in quad]
        ys = [p[1] for p in quad]
        x_lo = max(0, int(np.floor(min(xs) - d)) - 1)
        x_hi = min(width_px, int(np.ceil(max(xs) + d)) + 1)
        y_lo = max(0, int(np.floor(min(ys) - d)) - 1)
        y_hi = min(height_px, int(np.ceil(max(ys) + d)) + 1)
        if x_lo >= x_hi or y_lo >= y_hi:
            continue
        cx, cy = np.meshgrid(
            np.arange(x_lo, x_hi, dtype=np.float64) + 0.5,
            np.arange(y_lo, y_hi, dtype=np.float64) + 0.5,
        )
        hit = _points_in_polygon(cx, cy, quad)
        for i in range(4):
            a, b = quad[i], quad[(i + 1) % 4]
            hit |= _square_hits_segment(cx, cy, d, a, b)
        mask[y_lo:y_hi, x_lo:x_hi] |= hit
    return mask


def _points_in_polygon(px: np.ndarray, py: np.ndarray, poly: Sequence[tuple]) -> np.ndarray:
    inside = np.zeros(px.shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        crosses = (y1 > py) != (y2 > py)
        if y1 == y2:
            continue
        t = (py - y1) / (y2 - y1)
        xint = x1 + t * (x2 - x1)
        inside ^= crosses & (px < xint)
    return inside


def _square_hits_segment(
    cx: np.ndarray, cy: np.ndarray, d: float, a: tuple, b: tuple
) -> np.ndarray:
    """True where the segment a-b intersects the axis-aligned square of
    half-width d centered on (cx, cy). Liang-Barsky clipping, vectorized
    over centers."""
    ax, ay = a
    bx, by = b
    dx = bx - ax
    dy = by - ay
    t0 = np.zeros(cx.shape)
    t1 = np.ones(cx.shape)
    ok = np.ones(cx.shape, dtype=bool)
    for p, q in (
        (-dx, ax - (cx - d)),
        (dx, (cx + d) - ax),
        (-dy, ay - (cy - d)),
        (dy, (cy + d) - ay),
    ):
        if p == 0:
            ok &= q >= 0
        else:
            t = q / p
            if p < 0:
                t0 = np.maximum(t0, t)
            else:
                t1 = np.minimum(t1, t)
    return ok & (t0 <= t1)


def write_pbm(mask: np.ndarray, path: str | Path) -> None:
    """Binary PBM (P4); set pixels are black."""
    if mask.ndim != 2 or mask.dtype != bool:
        raise ValidationError("mask must be a 2-D boolean array")
    h, w = mask.shape
    header = f"P4\n{w} {h}\n".encode("ascii")
    packed = np.packbits(mask, axis=1)
    atomic_write_bytes(path, header + packed.tobytes())


def read_pbm(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if not raw.startswith(b"P4"):
        raise ValidationError("not a P4 PBM file")
    parts = raw.split(b"\n", 2)
    w, h = (int(v) for v in parts[1].split())
    row_bytes = (w + 7) // 8
    bits = np.unpackbits(
        np.frombuffer(parts[2], dtype=np.uint8, count=h * row_bytes).reshape(h, row_bytes),
        axis=1,
    )
    return bits[:, :w].astype(bool)
