"""Zero-shot image categorization against a fixed taxonomy.

Label words are expanded through prompt templates; the text embeddings of
a word's prompts are unit-normalized, averaged, and renormalized into one
bank row per word. An image lands on the super-class of its best-scoring
word, or "Other" when the best cosine similarity falls below the floor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .ingest import EmbeddingMatrix

_NORM_TOL = 1e-3


@dataclass(frozen=True)
class Taxonomy:
    super_classes: tuple[str, ...]
    label_words: dict[str, tuple[str, ...]]
    templates: tuple[str, ...]
    other_name: str
    threshold: float

    def words(self) -> list[str]:
        """All label words, in taxonomy order."""
        out = []
        for sc in self.super_classes:
            out.extend(self.label_words[sc])
        return out

    def super_class_of(self, word: str) -> str:
        for sc in self.super_classes:
            if word in self.label_words[sc]:
                return sc
        raise ValidationError(f"word {word!r} not in taxonomy")


@dataclass
class LabelBank:
    words: list[str]
    word_to_class: dict[str, str]
    matrix: np.ndarray  # (n_words, dim), unit rows
    threshold: float
    other_name: str


def load_taxonomy(path: str | Path | None = None) -> Taxonomy:
    """Load a taxonomy JSON; default to the packaged one."""
    if path is None:
        text = resources.files("trforge.data").joinpath("taxonomy.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    doc = json.loads(text)
    try:
        tax = Taxonomy(
            super_classes=tuple(doc["super_classes"]),
            label_words={k: tuple(v) for k, v in doc["label_words"].items()},
            templates=tuple(doc["templates"]),
            other_name=doc["other_name"],
            threshold=float(doc["threshold"]),
        )
    except KeyError as e:
        raise ValidationError(f"taxonomy missing key {e}") from e
    if set(tax.label_words) != set(tax.super_classes):
        raise ValidationError("label_words keys do not match super_classes")
    seen = set()
    for w in tax.words():
        if w in seen:
            raise ValidationError(f"label word {w!r} appears twice")
        seen.add(w)
    if not tax.templates:
        raise ValidationError("taxonomy has no templates")
    return tax


def expand_prompts(taxonomy: Taxonomy) -> list[tuple[str, str, str]]:
    """Every (word, template, rendered prompt), word-major in taxonomy
    order. The rendered prompt string doubles as the embedding id."""
    out = []
    for word in taxonomy.words():
        for template in taxonomy.templates:
            out.append((word, template, template.format(word)))
    return out


def build_label_bank(taxonomy: Taxonomy, prompt_embeddings: EmbeddingMatrix) -> LabelBank:
    """Average each word's prompt embeddings on the unit sphere.

    prompt_embeddings must carry one row per rendered prompt, keyed by the
    prompt string itself. A missing (word, template) pair is an error
    naming the pair.
    """
    index = {pid: i for i, pid in enumerate(prompt_embeddings.ids)}
    data = prompt_embeddings.data.astype(np.float64)

    words = taxonomy.words()
    rows = np.empty((len(words), data.shape[1]), dtype=np.float64)
    for wi, word in enumerate(words):
        vecs = []
        for template in taxonomy.templates:
            prompt = template.format(word)
            if prompt not in index:
                raise ValidationError(
                    f"no embedding for word {word!r} with template {template!r}"
                )
            v = data[index[prompt]]
            norm = np.linalg.norm(v)
            if norm == 0.0:
                raise ValidationError(f"zero embedding for prompt {prompt!r}")
            vecs.append(v / norm)
        mean = np.mean(vecs, axis=0)
        norm = np.linalg.norm(mean)
        if norm == 0.0:
            raise ValidationError(f"prompt embeddings for {word!r} cancel to zero")
        rows[wi] = mean / norm

    word_to_class = {w: taxonomy.super_class_of(w) for w in words}
    return LabelBank(
        words=list(words),
        word_to_class=word_to_class,
        matrix=rows,
        threshold=taxonomy.threshold,
        other_name=taxonomy.other_name,
    )


def classify(
    bank: LabelBank, images: EmbeddingMatrix
) -> list[tuple[str, str, str | None, float]]:
    """(image_id, super_class, best word or None, best score) per row.

    Image rows must already be unit-normalized; the dot product against
    unit bank rows is then cosine similarity. A best score strictly below
    the threshold labels the image with the catch-all class and no word.
    Ties on the best score resolve to the earliest word in taxonomy order.
    """
    x = images.data.astype(np.float64)
    norms = np.linalg.norm(x, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > _NORM_TOL)
    if bad.size:
        raise ValidationError(
            f"image embedding {images.ids[int(bad[0])]!r} is not unit-norm "
            f"(|v|={norms[int(bad[0])]:.6f}); normalize rows first"
        )
    scores = x @ bank.matrix.T
    best = np.argmax(scores, axis=1)  # first max wins, i.e. taxonomy order
    out = []
    for i, image_id in enumerate(images.ids):
        w = bank.words[int(best[i])]
        s = float(scores[i, int(best[i])])
        if s < bank.threshold:
            out.append((image_id, bank.other_name, None, s))
        else:
            out.append((image_id, bank.word_to_class[w], w, s))
    return out


def category_histogram(
    labels: Sequence[tuple[str, str, str | None, float]]
) -> dict[str, int]:
    hist: dict[str, int] = {}
    for _, super_class, _, _ in labels:
        hist[super_class] = hist.get(super_class, 0) + 1
    return hist
