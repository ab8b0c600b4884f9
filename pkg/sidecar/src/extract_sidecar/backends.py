"""Model backends and their deterministic stand-ins.

Real model wrappers (CLIP, BLIP-2, PaddleOCR, EasyOCR) are thin and
constructed only when explicitly requested, because they need weights
and often a GPU. The "auto" backend resolves to a deterministic,
dependency-free implementation so jobs behave identically on any
machine: embeddings are content-hash seeded, captions are computed from
image statistics, OCR detects ink regions geometrically. Outputs stay
format-compatible either way; only the quality changes.
"""

from __future__ import annotations

import hashlib
import logging
from typing import Sequence

import numpy as np

from .errors import BackendUnavailable, JobError
from .imaging import luminance

log = logging.getLogger("extract_sidecar")

Quad = list[list[float]]
# (quad, text, confidence) triples in reading order
OcrWord = tuple[Quad, str, float]


def _runs(flags: np.ndarray, min_gap: int) -> list[tuple[int, int]]:
    """Half-open runs of True, merging runs separated by short False gaps."""
    idx = np.flatnonzero(flags)
    if idx.size == 0:
        return []
    out: list[tuple[int, int]] = []
    start = prev = int(idx[0])
    for i in idx[1:]:
        i = int(i)
        if i - prev > min_gap:
            out.append((start, prev + 1))
            start = i
        prev = i
    out.append((start, prev + 1))
    return out


class HashEmbedder:
    """Content-addressed pseudo-embeddings.

    Each payload is hashed and the digest seeds a PRNG that draws a unit
    vector, so identical bytes embed identically on every platform and
    nothing needs model weights. Useful for plumbing tests and dry runs,
    not for semantic similarity.
    """

    def __init__(self, dim: int = 512, namespace: str = "image"):
        if dim < 1:
            raise JobError(f"embedding dim must be >= 1, got {dim}")
        self.dim = dim
        self.namespace = namespace
        self.model_id = f"hash-{namespace}-d{dim}"

    def _one(self, payload: bytes) -> np.ndarray:
        digest = hashlib.sha256(self.namespace.encode("ascii") + b"\x00" + payload).digest()
        seed = np.frombuffer(digest[:16], dtype=np.uint64)
        vec = np.random.default_rng(seed).standard_normal(self.dim)
        vec /= np.linalg.norm(vec)
        return vec.astype(np.float32)

    def embed_images(self, images: Sequence[np.ndarray]) -> np.ndarray:
        if not images:
            return np.zeros((0, self.dim), dtype=np.float32)
        # hash decoded pixels, not file bytes, so re-encoded copies coincide
        payloads = [f"{im.shape[0]}x{im.shape[1]}:".encode("ascii") + im.tobytes() for im in images]
        return np.stack([self._one(p) for p in payloads])

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim), dtype=np.float32)
        return np.stack([self._one(t.encode("utf-8")) for t in texts])


class ClipEmbedder:
    """sentence-transformers CLIP wrapper; images and texts share a space."""

    def __init__(self, model: str = "clip-ViT-B-32"):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as e:
            raise BackendUnavailable(f"sentence-transformers not installed: {e}") from e
        try:
            self._model = SentenceTransformer(model)
        except Exception as e:
            raise BackendUnavailable(f"cannot load CLIP model {model!r}: {e}") from e
        self.model_id = model

    def embed_images(self, images: Sequence[np.ndarray]) -> np.ndarray:
        from PIL import Image

        pil = [Image.fromarray(im, mode="RGB") for im in images]
        return np.asarray(self._model.encode(pil), dtype=np.float32)

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        return np.asarray(self._model.encode(list(texts)), dtype=np.float32)


class TemplateCaptioner:
    """Describes an image from its measured statistics; fully deterministic."""

    model_id = "template-v1"

    def caption(self, rgb: np.ndarray) -> str:
        h, w = rgb.shape[:2]
        lum = luminance(rgb) / 255.0
        tone = "dark" if lum.mean() < 0.35 else "light" if lum.mean() > 0.65 else "mid-tone"
        ink = float((lum < 0.5).mean())
        return f"a {tone} image, {w}x{h} px, ink fraction {ink:.2f}"


class Blip2Captioner:
    """transformers image-to-text pipeline wrapper."""

    def __init__(self, model: str = "Salesforce/blip2-opt-2.7b"):
        try:
            from transformers import pipeline
        except ImportError as e:
            raise BackendUnavailable(f"transformers not installed: {e}") from e
        try:
            self._pipe = pipeline("image-to-text", model=model)
        except Exception as e:
            raise BackendUnavailable(f"cannot load caption model {model!r}: {e}") from e
        self.model_id = model

    def caption(self, rgb: np.ndarray) -> str:
        from PIL import Image

        out = self._pipe(Image.fromarray(rgb, mode="RGB"))
        return out[0]["generated_text"].strip()


class InkOcr:
    """Geometric text detector used when no OCR engine is installed.

    Dark pixels are grouped into horizontal bands, bands are split into
    words at column gaps wider than a fraction of the band height. The
    detector localizes but does not read, so word texts are placeholders;
    confidences reflect ink density inside each box.
    """

    model_id = "ink-detector-v1"

    def __init__(self, threshold: float = 128.0, word_gap_frac: float = 0.35):
        self.threshold = threshold
        self.word_gap_frac = word_gap_frac

    def recognize(self, rgb: np.ndarray) -> list[OcrWord]:
        dark = luminance(rgb) < self.threshold
        words: list[OcrWord] = []
        for y0, y1 in _runs(dark.any(axis=1), min_gap=1):
            band = dark[y0:y1]
            gap = max(2, round((y1 - y0) * self.word_gap_frac))
            for x0, x1 in _runs(band.any(axis=0), min_gap=gap):
                sub = band[:, x0:x1]
                rows = np.flatnonzero(sub.any(axis=1))
                top = y0 + int(rows[0])
                bot = y0 + int(rows[-1]) + 1
                fill = float(sub[rows[0] : rows[-1] + 1].mean())
                conf = round(float(np.clip(0.25 + fill, 0.05, 0.99)), 4)
                quad = [
                    [float(x0), float(top)],
                    [float(x1), float(top)],
                    [float(x1), float(bot)],
                    [float(x0), float(bot)],
                ]
                words.append((quad, f"ink{len(words)}", conf))
        return words


class PaddleOcrWrapper:
    """Thin adapter over paddleocr exposing the same recognize() shape."""

    model_id = "paddleocr"

    def __init__(self, lang: str = "en"):
        try:
            from paddleocr import PaddleOCR
        except ImportError as e:
            raise BackendUnavailable(f"paddleocr not installed: {e}") from e
        try:
            self._ocr = PaddleOCR(lang=lang, show_log=False)
        except Exception as e:
            raise BackendUnavailable(f"cannot initialize paddleocr: {e}") from e

    def recognize(self, rgb: np.ndarray) -> list[OcrWord]:
        result = self._ocr.ocr(rgb[..., ::-1]) or []
        words: list[OcrWord] = []
        for page in result:
            for box, (text, conf) in page or []:
                quad = [[float(x), float(y)] for x, y in box]
                words.append((quad, str(text), float(conf)))
        return words


class EasyOcrWrapper:
    """Thin adapter over easyocr exposing the same recognize() shape."""

    model_id = "easyocr"

    def __init__(self, lang: str = "en"):
        try:
            import easyocr
        except ImportError as e:
            raise BackendUnavailable(f"easyocr not installed: {e}") from e
        try:
            self._reader = easyocr.Reader([lang], verbose=False)
        except Exception as e:
            raise BackendUnavailable(f"cannot initialize easyocr: {e}") from e

    def recognize(self, rgb: np.ndarray) -> list[OcrWord]:
        words: list[OcrWord] = []
        for box, text, conf in self._reader.readtext(rgb):
            quad = [[float(x), float(y)] for x, y in box]
            words.append((quad, str(text), float(conf)))
        return words


class InkStatClassifier:
    """Text-likelihood proxy from edge density; monotone in glyph coverage."""

    model_id = "inkstat-v1"

    def p_text(self, rgb: np.ndarray) -> float:
        lum = luminance(rgb) / 255.0
        gy, gx = np.gradient(lum)
        edge_frac = float((np.hypot(gx, gy) > 0.12).mean())
        return round(float(np.clip(edge_frac * 6.0, 0.0, 1.0)), 6)


def resolve_embedder(backend: str, model: str, dim: int, namespace: str):
    if backend == "hash":
        return HashEmbedder(dim=dim, namespace=namespace)
    if backend == "clip":
        return ClipEmbedder(model)
    if backend == "auto":
        log.info("backend=auto: using hash embedder (pass --backend clip for the real model)")
        return HashEmbedder(dim=dim, namespace=namespace)
    raise JobError(f"unknown embedding backend {backend!r}")


def resolve_captioner(backend: str, model: str):
    if backend == "template":
        return TemplateCaptioner()
    if backend == "blip2":
        return Blip2Captioner(model)
    if backend == "auto":
        log.info("backend=auto: using template captioner (pass --backend blip2 for the real model)")
        return TemplateCaptioner()
    raise JobError(f"unknown caption backend {backend!r}")


def resolve_ocr(backend: str):
    if backend == "ink":
        return InkOcr()
    if backend == "paddle":
        return PaddleOcrWrapper()
    if backend == "easy":
        return EasyOcrWrapper()
    if backend == "auto":
        log.info("backend=auto: using ink detector (pass --backend paddle/easy for a real engine)")
        return InkOcr()
    raise JobError(f"unknown OCR backend {backend!r}")


def resolve_classifier(backend: str):
    if backend in ("inkstat", "auto"):
        return InkStatClassifier()
    raise JobError(f"unknown classifier backend {backend!r}")
