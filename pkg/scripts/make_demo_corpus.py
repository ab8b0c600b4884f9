#!/usr/bin/env python3
"""Generate a synthetic corpus that exercises every pipeline stage offline.

Writes, under --out:
  metadata.jsonl        image metadata with some rejects and duplicates
  embeddings.trfg(.ids) image embeddings grouped around taxonomy words
  prompts.trfg(.ids)    one embedding per classification prompt
  ocr/<id>.json         per-image OCR words (paddle layout)
  transcript.jsonl      recorded chat replies for every image id
  eval/records.jsonl    VQA records with answer pixel heights
  eval/predictions.jsonl    a mix of exact, partial, and wrong answers
  eval/fontsize_predictions.jsonl  per-(qid, target) readings
  eval/judge_inputs.jsonl   candidate/reference answer pairs
  eval/judge_transcript.jsonl   recorded judge replies

Everything is deterministic in --seed, so pipeline runs are reproducible
byte for byte.
"""

import argparse
import hashlib
import json
from pathlib import Path

import numpy as np

from trforge.categorization import expand_prompts, load_taxonomy
from trforge.ingest import EmbeddingMatrix, write_embeddings

DIM = 16


def word_direction(word: str, dim: int = DIM) -> np.ndarray:
    digest = hashlib.sha256(word.encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def write_jsonl(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def build_metadata(rng, n, out):
    rows = []
    for i in range(n):
        image_id = f"img{i:04d}"
        sha = hashlib.sha256(f"content-{i}".encode()).hexdigest()
        p_text = float(rng.uniform(0.5, 1.0))
        p_watermark = float(rng.uniform(0.0, 1.0))
        p_unsafe = float(rng.uniform(0.0, 0.6))
        if i % 17 == 0 and i > 0:  # occasional duplicate upload
            sha = hashlib.sha256(f"content-{i - 1}".encode()).hexdigest()
        rows.append({
            "image_id": image_id,
            "url": f"https://corpus.invalid/{image_id}.jpg",
            "width_px": int(rng.integers(480, 1600)),
            "height_px": int(rng.integers(480, 1600)),
            "p_text": round(p_text, 4),
            "p_watermark": round(p_watermark, 4),
            "p_unsafe": round(p_unsafe, 4),
            "sha256": sha,
        })
    write_jsonl(out / "metadata.jsonl", rows)
    return [r["image_id"] for r in rows]


def build_embeddings(rng, ids, words, out):
    assigned = [words[i % len(words)] for i in range(len(ids))]
    data = np.vstack([
        word_direction(w) + rng.normal(scale=0.03, size=DIM) for w in assigned
    ]).astype(np.float32)
    write_embeddings(EmbeddingMatrix(ids=list(ids), data=data), out / "embeddings.trfg")
    return dict(zip(ids, assigned))


def build_prompt_embeddings(rng, taxonomy, out):
    triples = expand_prompts(taxonomy)
    ids = [prompt for _, _, prompt in triples]
    data = np.vstack([
        word_direction(word) + rng.normal(scale=0.01, size=DIM)
        for word, _, _ in triples
    ]).astype(np.float32)
    write_embeddings(EmbeddingMatrix(ids=ids, data=data), out / "prompts.trfg")


def build_ocr(rng, ids, word_of, out):
    ocr_dir = out / "ocr"
    ocr_dir.mkdir(parents=True, exist_ok=True)
    vocabulary = "SALE NOW OPEN TODAY NEW BEST FREE SHOP HERE BIG".split()
    for image_id in ids:
        n_words = int(rng.integers(2, 7))
        entries = []
        x, y = 20.0, 20.0
        for j in range(n_words):
            text = vocabulary[int(rng.integers(0, len(vocabulary)))]
            w = 14.0 * len(text)
            h = float(rng.integers(14, 30))
            quad = [[x, y], [x + w, y], [x + w, y + h], [x, y + h]]
            entries.append([quad, [text, float(rng.uniform(0.85, 0.99))]])
            x += w + 12.0
            if x > 500.0:
                x, y = 20.0, y + h + 18.0
        doc = {
            "image_id": image_id,
            "width_px": 800,
            "height_px": 600,
            "engine": "paddle",
            "result": entries,
        }
        (ocr_dir / f"{image_id}.json").write_text(json.dumps(doc))


def build_transcript(ids, word_of, out):
    rows = []
    for image_id in ids:
        word = word_of[image_id]
        reply = (
            f"Question: What kind of image is this?\n"
            f"Answer: It looks like a {word} with prominent rendered text.\n\n"
            f"Question: What does the text say?\n"
            f"Answer: The visible text includes the words shown in the image."
        )
        rows.append({"id": image_id, "response": reply})
    write_jsonl(out / "transcript.jsonl", rows)


def build_eval_fixtures(rng, ids, out):
    eval_dir = out / "eval"
    answers = ["open today", "big sale", "shop here", "best price", "now open"]
    records, preds, fs_preds, judge_in, judge_tr = [], [], [], [], []
    for i, image_id in enumerate(ids[:30]):
        qid = f"q{i:03d}"
        gt = answers[i % len(answers)]
        records.append({
            "qid": qid,
            "image_id": image_id,
            "question": "What does the sign say?",
            "gt_answers": [gt],
            "answer_height_px": float(rng.integers(8, 40)),
        })
        kind = i % 3
        if kind == 0:
            prediction = f"The sign says {gt}."
        elif kind == 1:  # one-letter corruption: partial credit territory
            prediction = f"The sign says {gt[:-1]}x."
        else:
            prediction = "I cannot tell."
        preds.append({"qid": qid, "prediction": prediction})
        for target in (3, 7, 11, 15, 19):
            legible = target >= 8
            fs_preds.append({
                "qid": qid,
                "target_height_px": target,
                "prediction": f"it says {gt}" if legible else "too small to read",
            })
        judge_in.append({
            "qid": qid,
            "question": "What does the sign say?",
            "context": f"OCR: {gt.upper()}",
            "answer_candidate": prediction,
            "answer_reference": f"The sign says {gt}.",
        })
        cand_score = {0: 9, 1: 6, 2: 2}[kind]
        judge_tr.append({
            "id": qid,
            "response": f"{cand_score} 9\nReference reads the text verbatim.",
        })
    write_jsonl(eval_dir / "records.jsonl", records)
    write_jsonl(eval_dir / "predictions.jsonl", preds)
    write_jsonl(eval_dir / "fontsize_predictions.jsonl", fs_preds)
    write_jsonl(eval_dir / "judge_inputs.jsonl", judge_in)
    write_jsonl(eval_dir / "judge_transcript.jsonl", judge_tr)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--images", type=int, default=240)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    taxonomy = load_taxonomy()
    words = taxonomy.words()
    ids = build_metadata(rng, args.images, out)
    word_of = build_embeddings(rng, ids, words, out)
    build_prompt_embeddings(rng, taxonomy, out)
    build_ocr(rng, ids, word_of, out)
    build_transcript(ids, word_of, out)
    build_eval_fixtures(rng, ids, out)

    print(f"demo corpus with {len(ids)} images under {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
