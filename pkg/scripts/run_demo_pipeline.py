#!/usr/bin/env python3
"""Drive the full curation pipeline over a demo corpus, end to end.

Stages: filter -> cluster fit/assign -> gallery -> categorize ->
OCR merge -> noisy dataset -> chat-generated dataset (replayed from the
corpus transcript) -> validate -> stats. Every artifact lands under
--work with a manifest next to it.

Build the corpus first:
    python3 scripts/make_demo_corpus.py --out demo/corpus
    python3 scripts/run_demo_pipeline.py --corpus demo/corpus --work demo/work
"""

import argparse
import json
import sys
from pathlib import Path

from trforge.artifacts import read_jsonl, write_jsonl
from trforge.cli import main as trforge_main
from trforge.datasetgen import select_gpt4_pool


def run(*argv) -> None:
    argv = [str(a) for a in argv]
    print(f"$ trforge {' '.join(argv)}")
    code = trforge_main(argv)
    if code != 0:
        sys.exit(f"stage failed with exit code {code}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", required=True, type=Path)
    parser.add_argument("--work", required=True, type=Path)
    parser.add_argument("--k", type=int, default=6)
    parser.add_argument("--keep", type=int, default=4, help="clusters to keep")
    parser.add_argument("--cap", type=int, default=40, help="max images per kept cluster")
    parser.add_argument("--pool-per-cluster", type=int, default=5)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    corpus, work = args.corpus, args.work
    work.mkdir(parents=True, exist_ok=True)

    run("filter",
        "--metadata", corpus / "metadata.jsonl",
        "--out-ids", work / "kept.txt",
        "--summary", work / "filter_summary.json")

    run("cluster-fit",
        "--embeddings", corpus / "embeddings.trfg",
        "--k", args.k, "--sample-n", 0,
        "--seed", args.seed,
        "--out", work / "model.bin")

    run("cluster-assign",
        "--model", work / "model.bin",
        "--embeddings", corpus / "embeddings.trfg",
        "--out", work / "assignments.jsonl")

    # keep the most populous clusters, then cap and re-select
    assignments = list(read_jsonl(work / "assignments.jsonl"))
    sizes: dict[int, int] = {}
    for row in assignments:
        sizes[row["cluster"]] = sizes.get(row["cluster"], 0) + 1
    keep = sorted(sorted(sizes, key=sizes.get, reverse=True)[: args.keep])
    (work / "keeplist.json").write_text(
        json.dumps({"keep": keep, "cap_per_cluster": args.cap}, indent=2) + "\n"
    )
    print(f"keeping clusters {keep} (sizes {[sizes[c] for c in keep]})")

    run("cluster-assign",
        "--model", work / "model.bin",
        "--embeddings", corpus / "embeddings.trfg",
        "--out", work / "assignments.jsonl",
        "--keeplist", work / "keeplist.json",
        "--selected-out", work / "selected.txt",
        "--seed", args.seed)

    run("gallery",
        "--assignments", work / "assignments.jsonl",
        "--image-dir", corpus / "images",
        "--out-dir", work / "gallery",
        "--per-cluster", 8, "--seed", args.seed)

    run("categorize",
        "--prompt-embeddings", corpus / "prompts.trfg",
        "--image-embeddings", corpus / "embeddings.trfg",
        "--out", work / "labels.jsonl")

    run("ocr-merge",
        "--ocr", corpus / "ocr",
        "--engine", "paddle",
        "--out", work / "paragraphs.jsonl",
        "--texts-out", work / "texts.jsonl")

    run("build-noisy",
        "--texts", work / "texts.jsonl",
        "--seed", args.seed,
        "--out", work / "noisy.jsonl")

    # pool the kept clusters for chat-based generation
    triples = [(r["id"], r["cluster"], r["distance"]) for r in assignments]
    pool = select_gpt4_pool(
        triples, clusters=tuple(keep), per_cluster=args.pool_per_cluster, seed=args.seed
    )
    (work / "pool.txt").write_text("".join(i + "\n" for i in pool))

    texts = {r["image_id"]: r["text"] for r in read_jsonl(work / "texts.jsonl")}
    write_jsonl(
        work / "bundles.jsonl",
        (
            {
                "image_id": i,
                "ocr_a": texts.get(i, ""),
                "ocr_b": texts.get(i, "").lower(),
                "caption": "a text-rich demo image",
            }
            for i in pool
        ),
    )

    run("build-gpt4",
        "--pool", work / "pool.txt",
        "--bundles", work / "bundles.jsonl",
        "--out", work / "gpt4.jsonl",
        "--transcript", corpus / "transcript.jsonl")

    run("validate", "--conversations", work / "noisy.jsonl")
    run("validate", "--conversations", work / "gpt4.jsonl")
    run("stats", "--conversations", work / "noisy.jsonl", "--out", work / "noisy_stats.json")
    run("stats", "--conversations", work / "gpt4.jsonl", "--out", work / "gpt4_stats.json")

    print(f"\npipeline artifacts under {work}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
