import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for `import oracles`

from trforge.ingest import EmbeddingMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_meta(
    image_id="img0",
    url="http://example.com/0.jpg",
    width_px=640,
    height_px=480,
    p_text=0.95,
    p_watermark=0.1,
    p_unsafe=0.01,
    sha256=None,
):
    from trforge.ingest import ImageMeta

    if sha256 is None:
        sha256 = format(abs(hash(image_id)) % (1 << 62), "064x")
    return ImageMeta(
        image_id=image_id,
        url=url,
        width_px=width_px,
        height_px=height_px,
        p_text=p_text,
        p_watermark=p_watermark,
        p_unsafe=p_unsafe,
        sha256=sha256,
    )


def meta_json(**kwargs) -> str:
    m = make_meta(**kwargs)
    return json.dumps(
        {
            "image_id": m.image_id,
            "url": m.url,
            "width_px": m.width_px,
            "height_px": m.height_px,
            "p_text": m.p_text,
            "p_watermark": m.p_watermark,
            "p_unsafe": m.p_unsafe,
            "sha256": m.sha256,
        }
    )


def axis_quad(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def make_matrix(n=8, d=4, seed=0, prefix="id"):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(n, d)).astype(np.float32)
    return EmbeddingMatrix(ids=[f"{prefix}{i}" for i in range(n)], data=data)


def blob_matrix(n_per=10, centers=None, spread=0.05, seed=7, dim=2):
    """Well-separated Gaussian blobs; returns (matrix, true_labels)."""
    if centers is None:
        centers = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)]
    rng = np.random.default_rng(seed)
    rows = []
    labels = []
    for ci, c in enumerate(centers):
        pts = rng.normal(scale=spread, size=(n_per, dim)) + np.asarray(c)
        rows.append(pts)
        labels.extend([ci] * n_per)
    data = np.vstack(rows).astype(np.float32)
    ids = [f"b{i}" for i in range(len(labels))]
    return EmbeddingMatrix(ids=ids, data=data), np.asarray(labels)
