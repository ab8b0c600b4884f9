"""Pixel-level helpers: image I/O, resizing, text masks, inpainting.

OpenCV is only needed for Telea inpainting and is imported lazily, so
every other operation works on a bare numpy + Pillow install.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import InpaintUnavailable, JobError

Quad = Sequence[Sequence[float]]


def load_image(path: str | Path) -> np.ndarray:
    """Decode to an RGB uint8 array of shape (h, w, 3).

    Raises OSError for missing or undecodable files; callers decide
    whether that skips the row or fails the job.
    """
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_image(path: str | Path, rgb: np.ndarray) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(rgb, mode="RGB").save(path)


def luminance(rgb: np.ndarray) -> np.ndarray:
    """Rec. 601 luma as float64 in [0, 255]."""
    r = rgb[..., 0].astype(np.float64)
    g = rgb[..., 1].astype(np.float64)
    b = rgb[..., 2].astype(np.float64)
    return 0.299 * r + 0.587 * g + 0.114 * b


def resize_bilinear(rgb: np.ndarray, scale: float) -> np.ndarray:
    """Uniform bilinear rescale; output sides are rounded and floored at 1 px."""
    if scale <= 0:
        raise JobError(f"scale must be positive, got {scale}")
    h, w = rgb.shape[:2]
    nw = max(1, round(w * scale))
    nh = max(1, round(h * scale))
    out = Image.fromarray(rgb, mode="RGB").resize((nw, nh), Image.Resampling.BILINEAR)
    return np.asarray(out, dtype=np.uint8)


def _chebyshev_to_segment(
    px: np.ndarray, py: np.ndarray, a: tuple[float, float], b: tuple[float, float]
) -> np.ndarray:
    """Chebyshev (L-inf) distance from each grid point to segment a-b.

    The distance along the segment, max(|x(t)-px|, |y(t)-py|), is convex
    piecewise-linear in t, so the minimum over t in [0, 1] is attained at
    an endpoint or at one of the four kink locations; evaluating those
    candidates is exact.
    """
    ax, ay = a
    bx, by = b
    dx = bx - ax
    dy = by - ay
    u0 = ax - px
    v0 = ay - py

    candidates = [np.zeros_like(px), np.ones_like(px)]
    if dx != 0.0:
        candidates.append(-u0 / dx)
    if dy != 0.0:
        candidates.append(-v0 / dy)
    if dx != dy:
        candidates.append((v0 - u0) / (dx - dy))
    if dx != -dy:
        candidates.append(-(u0 + v0) / (dx + dy))

    best = None
    for t in candidates:
        t = np.clip(t, 0.0, 1.0)
        f = np.maximum(np.abs(u0 + t * dx), np.abs(v0 + t * dy))
        best = f if best is None else np.minimum(best, f)
    return best


def _inside_polygon(px: np.ndarray, py: np.ndarray, quad: Quad) -> np.ndarray:
    inside = np.zeros(px.shape, dtype=bool)
    n = len(quad)
    for i in range(n):
        x1, y1 = float(quad[i][0]), float(quad[i][1])
        x2, y2 = float(quad[(i + 1) % n][0]), float(quad[(i + 1) % n][1])
        if y1 == y2:
            continue
        crosses = (y1 > py) != (y2 > py)
        t = (py - y1) / (y2 - y1)
        xint = x1 + t * (x2 - x1)
        inside ^= crosses & (px < xint)
    return inside


def quad_mask(
    width_px: int, height_px: int, quads: Sequence[Quad], dilation_px: int = 2
) -> np.ndarray:
    """Boolean (height, width) mask of quad regions grown by a square
    structuring element: a pixel is set when its center lies inside a
    quad or within dilation_px of a quad edge in Chebyshev distance."""
    if width_px < 1 or height_px < 1:
        raise JobError(f"bad mask dimensions {width_px}x{height_px}")
    if dilation_px < 0:
        raise JobError(f"dilation_px={dilation_px} must be >= 0")
    mask = np.zeros((height_px, width_px), dtype=bool)
    d = float(dilation_px)
    for quad in quads:
        if len(quad) != 4:
            raise JobError(f"quad needs 4 points, got {len(quad)}")
        xs = [float(p[0]) for p in quad]
        ys = [float(p[1]) for p in quad]
        x_lo = max(0, int(np.floor(min(xs) - d)) - 1)
        x_hi = min(width_px, int(np.ceil(max(xs) + d)) + 1)
        y_lo = max(0, int(np.floor(min(ys) - d)) - 1)
        y_hi = min(height_px, int(np.ceil(max(ys) + d)) + 1)
        if x_lo >= x_hi or y_lo >= y_hi:
            continue
        px, py = np.meshgrid(
            np.arange(x_lo, x_hi, dtype=np.float64) + 0.5,
            np.arange(y_lo, y_hi, dtype=np.float64) + 0.5,
        )
        hit = _inside_polygon(px, py, quad)
        for i in range(4):
            a = (xs[i], ys[i])
            b = (xs[(i + 1) % 4], ys[(i + 1) % 4])
            hit |= _chebyshev_to_segment(px, py, a, b) <= d
        mask[y_lo:y_hi, x_lo:x_hi] |= hit
    return mask


def inpaint_telea(rgb: np.ndarray, mask: np.ndarray, radius: int = 3) -> np.ndarray:
    """Remove masked regions with OpenCV's Telea algorithm.

    Raises InpaintUnavailable when OpenCV is missing or the call fails;
    callers fall back to captioning the unmasked image and flag the row.
    """
    try:
        import cv2
    except ImportError as e:
        raise InpaintUnavailable(f"OpenCV not installed: {e}") from e
    if mask.shape != rgb.shape[:2]:
        raise JobError(f"mask shape {mask.shape} does not match image {rgb.shape[:2]}")
    try:
        out = cv2.inpaint(rgb, mask.astype(np.uint8) * 255, radius, cv2.INPAINT_TELEA)
    except Exception as e:  # cv2 raises cv2.error, a plain Exception subclass
        raise InpaintUnavailable(f"inpainting failed: {e}") from e
    return np.asarray(out, dtype=np.uint8)


def box_iou(
    a: tuple[float, float, float, float], b: tuple[float, float, float, float]
) -> float:
    """Intersection over union of two (x0, y0, x1, y1) boxes."""
    ix0 = max(a[0], b[0])
    iy0 = max(a[1], b[1])
    ix1 = min(a[2], b[2])
    iy1 = min(a[3], b[3])
    iw = max(0.0, ix1 - ix0)
    ih = max(0.0, iy1 - iy0)
    inter = iw * ih
    area_a = max(0.0, a[2] - a[0]) * max(0.0, a[3] - a[1])
    area_b = max(0.0, b[2] - b[0]) * max(0.0, b[3] - b[1])
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0
