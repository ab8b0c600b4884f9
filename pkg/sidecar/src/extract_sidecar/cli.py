"""Command line front end.

One subcommand per job kind plus `run` for job files. Exit codes: 0 on
success, 1 for invalid jobs/manifests or unavailable backends, 2 for I/O
failures, 64 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import BackendUnavailable, JobError
from .jobs import ExtractJob, load_job
from .ops import run_job

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_common(sub: argparse.ArgumentParser, *, model_default: str = ""):
    sub.add_argument("--manifest", required=True, help="input manifest (JSONL)")
    sub.add_argument("--out", required=True, help="output path")
    sub.add_argument("--model", default=model_default, help="model identifier for real backends")
    sub.add_argument("--backend", default="auto", help="backend selector (default: auto)")
    sub.add_argument("--batch-size", type=int, default=8, dest="batch_size")
    sub.add_argument("--images-root", default=None, dest="images_root",
                     help="base dir for relative manifest paths (default: manifest dir)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="extract-sidecar", description=__doc__)
    p.add_argument("--version", action="version", version=f"extract-sidecar {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    subs = p.add_subparsers(dest="command")

    run = subs.add_parser("run", help="execute a job description file")
    run.add_argument("--job", required=True, help="job JSON file")

    ei = subs.add_parser("embed-images", help="embed manifest images into a binary matrix")
    _add_common(ei)
    ei.add_argument("--dim", type=int, default=512, help="width for the hash backend")

    et = subs.add_parser("embed-texts", help="embed manifest texts into a binary matrix")
    _add_common(et)
    et.add_argument("--dim", type=int, default=512, help="width for the hash backend")

    cm = subs.add_parser("caption-masked", help="caption images with text regions removed")
    _add_common(cm)
    cm.add_argument("--dilation", type=int, default=2, dest="dilation_px",
                    help="mask growth around each quad in px")

    ct = subs.add_parser("classify-text", help="score text likelihood per image")
    _add_common(ct)

    ro = subs.add_parser("run-ocr", help="write per-image OCR JSON files")
    _add_common(ro)
    ro.add_argument("--engine", default="paddle", choices=("paddle", "easy"),
                    help="native JSON dialect to emit")

    rz = subs.add_parser("resize", help="bilinear-rescale images per manifest")
    _add_common(rz)
    return p


_KIND_BY_COMMAND = {
    "embed-images": "embed_images",
    "embed-texts": "embed_texts",
    "caption-masked": "caption_masked",
    "classify-text": "classify_text",
    "run-ocr": "run_ocr",
    "resize": "resize",
}


def _job_from_args(args) -> ExtractJob:
    if args.command == "run":
        return load_job(args.job)
    kwargs = dict(
        kind=_KIND_BY_COMMAND[args.command],
        manifest=Path(args.manifest),
        out=Path(args.out),
        model=args.model,
        backend=args.backend,
        batch_size=args.batch_size,
    )
    if args.images_root is not None:
        kwargs["images_root"] = Path(args.images_root)
    for name in ("dim", "dilation_px", "engine"):
        if hasattr(args, name):
            kwargs[name] = getattr(args, name)
    return ExtractJob(**kwargs)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        job = _job_from_args(args)
        report = run_job(job)
    except (JobError, BackendUnavailable) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    summary = {k: v for k, v in report.items() if k not in ("items", "errors")}
    if report.get("errors"):
        summary["errors"] = len(report["errors"])
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
