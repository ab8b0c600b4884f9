#!/usr/bin/env python3
"""Run the evaluation half of the toolkit over demo fixtures.

Scores VQA predictions (containment, ANLS, partial credit, caption
metrics), replays recorded judge verdicts for relative scoring, and
produces the recognizable-font-size accuracy curve.

    python3 scripts/make_demo_corpus.py --out demo/corpus
    python3 scripts/run_demo_eval.py --corpus demo/corpus --work demo/eval
"""

import argparse
import json
import sys
from pathlib import Path

from trforge.cli import main as trforge_main


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
    args = parser.parse_args()

    fixtures = args.corpus / "eval"
    work = args.work
    work.mkdir(parents=True, exist_ok=True)

    run("eval-vqa",
        "--records", fixtures / "records.jsonl",
        "--predictions", fixtures / "predictions.jsonl",
        "--out", work / "vqa_report.json")

    run("eval-judge",
        "--inputs", fixtures / "judge_inputs.jsonl",
        "--out", work / "judged.jsonl",
        "--transcript", fixtures / "judge_transcript.jsonl")

    run("fontsize-plan",
        "--records", fixtures / "records.jsonl",
        "--out", work / "fontsize_jobs.jsonl",
        "--targets", "3..19")

    run("fontsize-score",
        "--records", fixtures / "records.jsonl",
        "--predictions", fixtures / "fontsize_predictions.jsonl",
        "--out", work / "fontsize_bins.json",
        "--targets", "3,7,11,15,19")

    bins = json.loads((work / "fontsize_bins.json").read_text())
    print("\naccuracy by answer text height:")
    for b in bins:
        bar = "#" * round(40 * b["accuracy"])
        print(f"  {b['target_height_px']:>3}px  {b['accuracy']:.2f}  {bar}")
    print(f"\nevaluation artifacts under {work}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
