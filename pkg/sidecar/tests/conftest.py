import json

import numpy as np
import pytest
from PIL import Image, ImageDraw, ImageFont


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


def save_rgb(path, arr):
    Image.fromarray(arr, mode="RGB").save(path)


@pytest.fixture
def corpus(tmp_path):
    """Three decodable images plus one undecodable file.

    block: white with a solid dark rectangle; ramp: horizontal gradient;
    noise: seeded uniform noise. broken.png holds garbage bytes.
    """
    d = tmp_path / "corpus"
    d.mkdir()
    block = np.full((30, 40, 3), 255, np.uint8)
    block[8:20, 5:30] = 0
    save_rgb(d / "block.png", block)

    g = np.linspace(0, 255, 40, dtype=np.uint8)
    save_rgb(d / "ramp.png", np.dstack([np.tile(g, (30, 1))] * 3))

    rng = np.random.default_rng(7)
    save_rgb(d / "noise.png", rng.integers(0, 256, (30, 40, 3), dtype=np.uint8))

    (d / "broken.png").write_bytes(b"this is not an image")
    return d


@pytest.fixture
def image_manifest(corpus):
    man = corpus / "images.jsonl"
    write_jsonl(
        man,
        [
            {"image_id": "block", "path": "block.png"},
            {"image_id": "ramp", "path": "ramp.png"},
            {"image_id": "noise", "path": "noise.png"},
        ],
    )
    return man


@pytest.fixture
def rendered_text(tmp_path):
    """Image with the word TEST drawn at a known location.

    Returns (png path, tight text bbox as x0, y0, x1, y1)."""
    img = Image.new("RGB", (160, 60), "white")
    draw = ImageDraw.Draw(img)
    font = ImageFont.load_default(size=32)
    draw.text((12, 8), "TEST", font=font, fill=(0, 0, 0))
    bbox = draw.textbbox((12, 8), "TEST", font=font)
    path = tmp_path / "test_word.png"
    img.save(path)
    return path, bbox
