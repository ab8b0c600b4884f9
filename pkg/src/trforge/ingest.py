"""Parsers and binary formats for externally produced inputs.

Image metadata arrives as JSONL, OCR output as the native JSON of either
supported engine, and dense embeddings as a small binary format with a
companion id file. Everything downstream consumes the canonical types
defined here and never re-reads vendor formats.
"""

from __future__ import annotations

import json
import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .artifacts import atomic_write_bytes, atomic_write_text
from .errors import FormatError, ValidationError

EMBEDDING_MAGIC = b"TRFG"
EMBEDDING_VERSION = 1
# magic, version, row count, dimension; payload follows as little-endian f32
_HEADER = struct.Struct("<4sHQI")

OCR_ENGINES = ("paddle", "easy")

_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")

Point = tuple[float, float]
Quad = tuple[Point, Point, Point, Point]


@dataclass(frozen=True)
class ImageMeta:
    image_id: str
    url: str
    width_px: int
    height_px: int
    p_text: float
    p_watermark: float
    p_unsafe: float
    sha256: str


@dataclass(frozen=True)
class WordBox:
    text: str
    confidence: float
    quad: Quad
    engine: str


@dataclass
class OcrDoc:
    image_id: str
    engine: str
    width_px: int
    height_px: int
    words: list[WordBox]
    warnings: int = 0


@dataclass(eq=False)
class EmbeddingMatrix:
    ids: list[str]
    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValidationError(f"embedding data must be 2-D, got shape {self.data.shape}")
        if len(self.ids) != self.data.shape[0]:
            raise ValidationError(
                f"{len(self.ids)} ids for {self.data.shape[0]} embedding rows"
            )
        seen = set()
        for i in self.ids:
            if i in seen:
                raise ValidationError(f"duplicate embedding id {i!r}")
            seen.add(i)

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    def row(self, image_id: str) -> np.ndarray:
        return self.data[self.ids.index(image_id)]


@dataclass
class ParsedMetadata:
    records: list[ImageMeta]
    errors: list[tuple[int, str]] = field(default_factory=list)


_META_FIELDS = (
    ("image_id", str),
    ("url", str),
    ("width_px", int),
    ("height_px", int),
    ("p_text", (int, float)),
    ("p_watermark", (int, float)),
    ("p_unsafe", (int, float)),
    ("sha256", str),
)


def _check_meta(obj: dict) -> ImageMeta:
    for name, types in _META_FIELDS:
        if name not in obj:
            raise ValidationError(f"missing field {name!r}")
        if not isinstance(obj[name], types) or isinstance(obj[name], bool):
            raise ValidationError(f"field {name!r} has wrong type {type(obj[name]).__name__}")
    if obj["width_px"] < 1 or obj["height_px"] < 1:
        raise ValidationError(f"non-positive dimensions {obj['width_px']}x{obj['height_px']}")
    for name in ("p_text", "p_watermark", "p_unsafe"):
        v = float(obj[name])
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"{name}={v} outside [0, 1]")
    if not _SHA256_RE.match(obj["sha256"]):
        raise ValidationError("sha256 is not 64 lowercase hex chars")
    if not obj["image_id"]:
        raise ValidationError("empty image_id")
    return ImageMeta(
        image_id=obj["image_id"],
        url=obj["url"],
        width_px=int(obj["width_px"]),
        height_px=int(obj["height_px"]),
        p_text=float(obj["p_text"]),
        p_watermark=float(obj["p_watermark"]),
        p_unsafe=float(obj["p_unsafe"]),
        sha256=obj["sha256"],
    )


def parse_metadata(path: str | Path) -> ParsedMetadata:
    """Parse a JSONL metadata dump. Malformed lines are collected as
    (line_number, message) instead of aborting the whole file; an
    unreadable file still raises."""
    out = ParsedMetadata(records=[])
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValidationError("line is not a JSON object")
                out.records.append(_check_meta(obj))
            except (json.JSONDecodeError, ValidationError) as e:
                out.errors.append((lineno, str(e)))
    return out


def canonical_quad(points: Sequence[Sequence[float]]) -> Quad:
    """Order four corners clockwise (in image coordinates, y down) starting
    from the corner with the smallest x+y."""
    if len(points) != 4:
        raise ValidationError(f"quad needs 4 points, got {len(points)}")
    pts = [(float(p[0]), float(p[1])) for p in points]
    cx = sum(p[0] for p in pts) / 4.0
    cy = sum(p[1] for p in pts) / 4.0
    # ascending atan2 with y down walks the corners clockwise on screen
    pts.sort(key=lambda p: math.atan2(p[1] - cy, p[0] - cx))
    start = min(range(4), key=lambda i: (pts[i][0] + pts[i][1], pts[i][1], pts[i][0]))
    ordered = pts[start:] + pts[:start]
    return (ordered[0], ordered[1], ordered[2], ordered[3])


def quad_area(quad: Sequence[Point]) -> float:
    """Shoelace area (absolute)."""
    s = 0.0
    for i in range(len(quad)):
        x1, y1 = quad[i]
        x2, y2 = quad[(i + 1) % len(quad)]
        s += x1 * y2 - x2 * y1
    return abs(s) / 2.0


def quad_bbox(quad: Sequence[Point]) -> tuple[float, float, float, float]:
    xs = [p[0] for p in quad]
    ys = [p[1] for p in quad]
    return (min(xs), min(ys), max(xs), max(ys))


def _extract_entry(entry, engine: str) -> tuple[list, str, float]:
    if engine == "paddle":
        # [quad, [text, confidence]]
        if not (isinstance(entry, list) and len(entry) == 2):
            raise ValidationError("paddle entry must be [quad, [text, confidence]]")
        box, payload = entry
        if not (isinstance(payload, (list, tuple)) and len(payload) == 2):
            raise ValidationError("paddle entry payload must be [text, confidence]")
        text, conf = payload
    else:
        # [quad, text, confidence]
        if not (isinstance(entry, list) and len(entry) == 3):
            raise ValidationError("easy entry must be [quad, text, confidence]")
        box, text, conf = entry
    if not isinstance(text, str):
        raise ValidationError(f"OCR text has type {type(text).__name__}")
    return box, text, float(conf)


def parse_ocr(path: str | Path, engine: str) -> OcrDoc:
    """Parse one image's OCR output.

    Accepts either the engine's bare result list, or a wrapper object
    {"image_id", "width_px", "height_px", "result"} as written by the
    extraction sidecar. Words with empty text or a zero-area quad are
    dropped and counted in OcrDoc.warnings; coordinates are clamped to
    image bounds when the bounds are known (excursions beyond 1px also
    count as warnings).
    """
    if engine not in OCR_ENGINES:
        raise ValidationError(f"unknown OCR engine {engine!r}")
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))

    width = height = None
    image_id = path.stem
    if isinstance(raw, dict):
        try:
            entries = raw["result"]
            image_id = raw["image_id"]
            width = int(raw["width_px"])
            height = int(raw["height_px"])
        except KeyError as e:
            raise ValidationError(f"OCR wrapper missing key {e}") from e
        if raw.get("engine", engine) != engine:
            raise ValidationError(
                f"wrapper says engine {raw['engine']!r}, caller says {engine!r}"
            )
        if width < 1 or height < 1:
            raise ValidationError(f"bad OCR image dimensions {width}x{height}")
    elif isinstance(raw, list):
        entries = raw
    else:
        raise ValidationError("OCR file must hold a list or a wrapper object")

    words: list[WordBox] = []
    warnings = 0
    quads: list[Quad] = []
    for i, entry in enumerate(entries):
        try:
            box, text, conf = _extract_entry(entry, engine)
            quad = canonical_quad(box)
        except (ValidationError, TypeError, IndexError) as e:
            raise ValidationError(f"entry {i}: {e}") from e
        if not text.strip():
            warnings += 1
            continue
        if quad_area(quad) <= 0.0:
            warnings += 1
            continue
        if width is not None:
            clamped, excursion = _clamp_quad(quad, width, height)
            if excursion > 1.0:
                warnings += 1
            quad = clamped
        if not 0.0 <= conf <= 1.0:
            raise ValidationError(f"entry {i}: confidence {conf} outside [0, 1]")
        quads.append(quad)
        words.append(WordBox(text=text, confidence=conf, quad=quad, engine=engine))

    if width is None:
        xs = [p[0] for q in quads for p in q]
        ys = [p[1] for q in quads for p in q]
        width = max(1, math.ceil(max(xs))) if xs else 1
        height = max(1, math.ceil(max(ys))) if ys else 1

    return OcrDoc(
        image_id=image_id,
        engine=engine,
        width_px=width,
        height_px=height,
        words=words,
        warnings=warnings,
    )


def _clamp_quad(quad: Quad, width: int, height: int) -> tuple[Quad, float]:
    excursion = 0.0
    out = []
    for x, y in quad:
        cx = min(max(x, 0.0), float(width))
        cy = min(max(y, 0.0), float(height))
        excursion = max(excursion, abs(cx - x), abs(cy - y))
        out.append((cx, cy))
    return (out[0], out[1], out[2], out[3]), excursion


def encode_embeddings(data: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(data, dtype="<f4")
    if arr.ndim != 2:
        raise ValidationError(f"embedding payload must be 2-D, got shape {arr.shape}")
    n, d = arr.shape
    return _HEADER.pack(EMBEDDING_MAGIC, EMBEDDING_VERSION, n, d) + arr.tobytes()


def decode_embeddings(buf: bytes) -> np.ndarray:
    if len(buf) < _HEADER.size:
        raise FormatError(f"embedding file too short for header ({len(buf)} bytes)")
    magic, version, n, d = _HEADER.unpack_from(buf)
    if magic != EMBEDDING_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {EMBEDDING_MAGIC!r}")
    if version != EMBEDDING_VERSION:
        raise FormatError(f"unsupported embedding format version {version}")
    expected = _HEADER.size + n * d * 4
    if len(buf) != expected:
        raise FormatError(
            f"payload truncated or padded: {len(buf)} bytes, expected {expected}"
        )
    arr = np.frombuffer(buf, dtype="<f4", offset=_HEADER.size).reshape(n, d)
    return arr.copy()


def ids_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".ids")


def write_embeddings(m: EmbeddingMatrix, path: str | Path) -> None:
    """Write the binary matrix and its companion .ids file."""
    atomic_write_bytes(path, encode_embeddings(m.data))
    atomic_write_text(ids_path(path), "".join(i + "\n" for i in m.ids))


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    path = Path(path)
    data = decode_embeddings(path.read_bytes())
    ids_file = ids_path(path)
    if not ids_file.exists():
        raise FormatError(f"missing id file {ids_file}")
    ids = ids_file.read_text(encoding="utf-8").splitlines()
    if len(ids) != data.shape[0]:
        raise FormatError(
            f"{len(ids)} ids in {ids_file.name} for {data.shape[0]} embedding rows"
        )
    return EmbeddingMatrix(ids=ids, data=data)


def normalize_rows(m: EmbeddingMatrix) -> EmbeddingMatrix:
    """Unit-normalize every row (L2). Norms are computed in float64 and the
    result is stored back as float32."""
    data = m.data.astype(np.float64)
    norms = np.linalg.norm(data, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValidationError(f"zero-norm embedding row for id {m.ids[int(zero[0])]!r}")
    out = (data / norms[:, None]).astype(np.float32)
    return EmbeddingMatrix(ids=list(m.ids), data=out)
