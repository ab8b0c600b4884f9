"""Job descriptions.

A job is one extraction task over one manifest: what to run, where the
inputs sit, where the outputs go, which model/backend to use. Jobs
arrive as JSON files or are assembled by the CLI from flags; both paths
funnel through the same validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import JobError

KINDS = (
    "embed_images",
    "embed_texts",
    "caption_masked",
    "classify_text",
    "run_ocr",
    "resize",
)

OCR_ENGINES = ("paddle", "easy")


@dataclass(frozen=True)
class ExtractJob:
    kind: str
    manifest: Path
    out: Path
    model: str = ""
    backend: str = "auto"
    batch_size: int = 8
    # embed_* with the hash backend; real models dictate their own width
    dim: int = 512
    # caption_masked: mask growth around each quad
    dilation_px: int = 2
    # run_ocr: which engine's native JSON dialect to emit
    engine: str = "paddle"
    # base directory for relative manifest paths; default is the manifest's parent
    images_root: Path | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise JobError(f"unknown job kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if not str(self.manifest):
            raise JobError("job needs a manifest path")
        if not str(self.out):
            raise JobError("job needs an output path")
        if self.batch_size < 1:
            raise JobError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.dim < 1:
            raise JobError(f"dim must be >= 1, got {self.dim}")
        if self.dilation_px < 0:
            raise JobError(f"dilation_px must be >= 0, got {self.dilation_px}")
        if self.kind == "run_ocr" and self.engine not in OCR_ENGINES:
            raise JobError(f"unknown OCR engine {self.engine!r}; expected one of {OCR_ENGINES}")

    def resolve_input(self, raw: str) -> Path:
        p = Path(raw)
        if p.is_absolute():
            return p
        root = self.images_root if self.images_root is not None else Path(self.manifest).parent
        return root / p


_PATH_FIELDS = ("manifest", "out", "images_root")


def job_from_dict(obj: dict) -> ExtractJob:
    if not isinstance(obj, dict):
        raise JobError("job description must be a JSON object")
    known = {f.name for f in fields(ExtractJob)}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise JobError(f"unknown job field {unknown[0]!r}")
    if "kind" not in obj or "manifest" not in obj or "out" not in obj:
        raise JobError("job needs at least: kind, manifest, out")
    kwargs = dict(obj)
    for name in _PATH_FIELDS:
        if kwargs.get(name) is not None:
            kwargs[name] = Path(kwargs[name])
    try:
        return ExtractJob(**kwargs)
    except TypeError as e:
        raise JobError(f"bad job description: {e}") from e


def load_job(path: str | Path) -> ExtractJob:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise JobError(f"job file {path} is not valid JSON: {e}") from e
    return job_from_dict(obj)


def read_manifest(path: str | Path, required: tuple[str, ...]) -> list[dict]:
    """JSONL manifest -> list of row dicts, validated for required keys.

    Manifests are produced by our own tooling, so unlike third-party
    inputs any malformed row fails the whole job loudly. An unreadable
    manifest file raises OSError untouched; only content problems map to
    JobError.
    """
    rows: list[dict] = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise JobError(f"manifest line {lineno}: {e}") from e
        if not isinstance(obj, dict):
            raise JobError(f"manifest line {lineno}: not a JSON object")
        for key in required:
            if key not in obj:
                raise JobError(f"manifest line {lineno}: missing {key!r}")
        rows.append(obj)
    id_key = required[0]
    seen: set[str] = set()
    for row in rows:
        rid = row[id_key]
        if not isinstance(rid, str) or not rid:
            raise JobError(f"manifest {id_key} must be a non-empty string, got {rid!r}")
        if rid in seen:
            raise JobError(f"duplicate manifest {id_key} {rid!r}")
        seen.add(rid)
    return rows
